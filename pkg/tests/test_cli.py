import json
import math

import pytest

from zeromodes.cli import main, parse_potential, reproduce_example
from zeromodes.errors import UnknownExample
from zeromodes.potential import AnalyticPotential, PiecewiseConstantPotential


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_potential():
    V = parse_potential("w:[-1,1]:1")
    assert isinstance(V, PiecewiseConstantPotential)
    assert V.breakpoints == (-1.0, 1.0) and V.values == (1.0,)
    V = parse_potential("w:[-2,-1,0,2]:-1,0,1")
    assert V.values == (-1.0, 0.0, 1.0)
    assert isinstance(parse_potential("hrp"), AnalyticPotential)
    for bad in ("w:[-1,1]", "w:(0,1):1", "gauss", "w:[1,0]:1"):
        with pytest.raises(Exception):
            parse_potential(bad)


def test_spectrum_real(capsys, tmp_path):
    out_file = tmp_path / "roots.jsonl"
    code, out, err = run(["spectrum", "--potential", "w:[-1,1]:1", "--k", "1",
                          "--R", "20", "--out", str(out_file)], capsys)
    assert code == 0
    recs = [json.loads(line) for line in out_file.read_text().splitlines()]
    assert len(recs) >= 1
    assert all(r["residual"] < 1e-9 for r in recs)
    assert abs(recs[0]["re"] - 1.519802561) < 1e-8


def test_spectrum_sech_well(capsys):
    code, out, err = run(["spectrum", "--potential", "hrp", "--k", "1.5", "--R", "4.5"], capsys)
    assert code == 0
    res = [json.loads(line)["re"] for line in out.strip().splitlines()]
    assert len(res) == 3
    for got, want in zip(res, (2.0, 3.0, 4.0)):
        assert abs(got - want) < 1e-6


def test_spectrum_missing_k(capsys):
    code, out, err = run(["spectrum", "--potential", "w:[-1,1]:1", "--R", "20"], capsys)
    assert code == 2
    assert "--k" in err


def test_spectrum_complex(capsys):
    code, out, err = run(["spectrum", "--potential", "w:[-1.5,-0.5,0.5,1.5]:-1,0,1",
                          "--k", "1", "--re-min", "10", "--re-max", "20",
                          "--im-min", "0.2", "--im-max", "2"], capsys)
    assert code == 0
    recs = [json.loads(line) for line in out.strip().splitlines()]
    assert len(recs) == 3
    assert all(r["method"] == "winding-newton" for r in recs)


def test_count_compare_gap_dichotomy(capsys):
    code, out, _ = run(["count-compare", "--potential", "w:[-1,0,2]:-1,1",
                        "--k", "1", "--R", "150"], capsys)
    assert code == 0
    nogap = json.loads(out)
    code, out, _ = run(["count-compare", "--potential", "w:[-2,-1,0,2]:-1,0,1",
                        "--k", "1", "--R", "150"], capsys)
    assert code == 0
    onegap = json.loads(out)
    ratio = onegap["comparison"]["empirical_slope"] / nogap["comparison"]["empirical_slope"]
    assert abs(ratio - 3.0) < 0.1
    assert onegap["prediction"]["theorem"] == "one-gap"


def test_count_compare_twin_gaps(capsys):
    code, out, _ = run(["count-compare", "--potential",
                        "w:[-2.5,-1.5,-1,1,1.5,2.5]:-1,0,1,0,-1",
                        "--k", "1", "--R", "100"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["comparison"]["n_roots"] == 2
    assert rep["prediction"]["slope"] is None

    code, out, _ = run(["count-compare", "--potential",
                        "w:[-3,-2,-1,1,2,3]:-1,0,1,0,-1",
                        "--k", "1", "--R", "150"], capsys)
    assert code == 0
    rep = json.loads(out)
    emp = rep["comparison"]["empirical_slope"]
    assert abs(emp - 4.0 / math.pi) / (4.0 / math.pi) < 0.05


def test_phaseplot(tmp_path, capsys):
    prefix = tmp_path / "bump"
    code, _, _ = run(["phaseplot", "--potential", "w:[-1,1]:1", "--k", "1",
                      "--re-min", "-5", "--re-max", "5", "--im-min", "-2", "--im-max", "2",
                      "--nx", "16", "--ny", "8", "--out-prefix", str(prefix)], capsys)
    assert code == 0
    assert (tmp_path / "bump.ppm").read_bytes().startswith(b"P6\n16 8\n255\n")
    assert (tmp_path / "bump.csv").read_text().splitlines()[0] == "re,im,arg"


def test_phaseplot_degenerate_rectangle(capsys):
    code, _, err = run(["phaseplot", "--potential", "w:[-1,1]:1", "--k", "1",
                        "--re-min", "0", "--re-max", "0", "--im-min", "0", "--im-max", "2"],
                       capsys)
    assert code == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("potential=w:[-1,1]:1\nk=1\nR=5\n")
    code, out, _ = run(["spectrum", "--config", str(conf)], capsys)
    assert code == 0
    base = out.strip().splitlines()
    code, out, _ = run(["spectrum", "--config", str(conf), "--R", "10"], capsys)
    wider = out.strip().splitlines()
    assert len(wider) > len(base)


def test_unknown_example(capsys):
    code, _, err = run(["reproduce", "--example", "9.9"], capsys)
    assert code == 2
    with pytest.raises(UnknownExample):
        reproduce_example("9.9", ".")


def test_reproduce_square_bump(tmp_path, capsys):
    code, out, _ = run(["reproduce", "--example", "2.1", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    for name in ("2.1_roots.jsonl", "2.1_determinant.csv", "2.1_phase.ppm", "2.1_phase.csv"):
        assert (tmp_path / name).exists()
    recs = [json.loads(l) for l in (tmp_path / "2.1_roots.jsonl").read_text().splitlines()]
    assert abs(recs[0]["re"] - 1.519802561) < 1e-8


def test_reproduce_antisymmetric(tmp_path, capsys):
    code, _, _ = run(["reproduce", "--example", "2.2", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    for g in ("0", "1"):
        det = (tmp_path / f"2.2_g{g}_determinant.csv").read_text().splitlines()[1:]
        vals = [float(line.split(",")[1]) for line in det]
        assert all(v > 0 for v in vals) or all(v < 0 for v in vals)  # no real roots
        roots = (tmp_path / f"2.2_g{g}_complex_roots.jsonl").read_text().splitlines()
        assert len(roots) >= 5
        asym = (tmp_path / f"2.2_g{g}_asymptote.csv").read_text().splitlines()
        assert asym[0] == "re,im"


def test_reproduce_twin_gap_dichotomy(tmp_path, capsys):
    code, _, _ = run(["reproduce", "--example", "2.4", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    rows05 = (tmp_path / "2.4_g0.5_count.csv").read_text().splitlines()[1:]
    counts05 = [int(float(r.split(",")[1])) for r in rows05]
    assert counts05[-1] == counts05[5]  # bounded count
    rows10 = (tmp_path / "2.4_g1_count.csv").read_text().splitlines()[1:]
    last = rows10[-1].split(",")
    assert abs(float(last[2]) - 4.0 / math.pi) / (4.0 / math.pi) < 0.05


def test_reproduce_sech_well(tmp_path, capsys):
    code, _, _ = run(["reproduce", "--example", "2.5", "--outdir", str(tmp_path)], capsys)
    assert code == 0
    for k, first in (("1", 1.5), ("1.5", 2.0)):
        rows = (tmp_path / f"2.5_k{k}_cosdelta.csv").read_text().splitlines()[1:]
        gs = [float(r.split(",")[0]) for r in rows]
        cd = [float(r.split(",")[1]) for r in rows]
        # cos(Delta) changes sign exactly at the eigenvalue couplings
        crossings = [0.5 * (gs[i] + gs[i + 1]) for i in range(len(gs) - 1)
                     if cd[i] * cd[i + 1] < 0]
        assert crossings, "no crossings found"
        assert min(abs(c - first) for c in crossings) < 0.05
        recs = [json.loads(l) for l in (tmp_path / f"2.5_k{k}_roots.jsonl").read_text().splitlines()]
        assert abs(recs[0]["re"] - first) < 1e-6


def test_determinism(tmp_path, capsys):
    args = ["spectrum", "--potential", "w:[-2,-1,0,2]:-1,0,1", "--k", "1", "--R", "30"]
    _, out1, _ = run(args, capsys)
    _, out2, _ = run(args + ["--jobs", "4"], capsys)
    assert out1 == out2


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(["count-compare", "--potential", "w:[0,1]:0", "--k", "1", "--R", "10"],
                       capsys)
    assert code == 3
    assert "failure" in err
