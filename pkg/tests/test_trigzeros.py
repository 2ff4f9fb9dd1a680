import math

import numpy as np
import pytest

from zeromodes.asymptotics import a_density
from zeromodes.errors import DegenerateEndpoint, NotCoprime, OutOfDomain, UnresolvedCell
from zeromodes.trigzeros import (
    Perturbation,
    TrigParams,
    angle_constants,
    brute_count,
    density_trace,
    density_trace_csv,
    f_value,
    multiplicity_m,
    rational_density,
    scan_zeros,
    tangency_test,
)


def test_pure_cosine_count():
    assert brute_count(TrigParams(0.0, 0.0), 100 * math.pi, math.pi / 8) == 100


def test_triple_zero_family_counted_once():
    p = TrigParams(1.0 / 3.0, 3.0)
    scan = scan_zeros(p, 0.0, 100 * math.pi, math.pi / 24)
    assert scan.count() == 100
    roots = scan.roots
    expected = (np.arange(100) + 0.5) * math.pi
    # triple zeros condition like cube roots of machine noise
    assert np.max(np.abs(roots - expected)) < 1e-4
    assert len(scan.tangential) > 0


def test_rational_case_density():
    p = TrigParams(0.9, 3.0)
    exact = rational_density(3, 1, 0.9)
    n = brute_count(p, 4000.0, math.pi / 24)
    assert abs(n / 4000.0 - exact) / exact < 0.01


def test_param_validation():
    with pytest.raises(OutOfDomain):
        TrigParams(1.0, 2.0)
    with pytest.raises(OutOfDomain):
        TrigParams(0.5, -1.0)
    with pytest.raises(ValueError):
        brute_count(TrigParams(0.5, 3.0), 10.0, 1.0)  # grid too coarse


def test_angle_constants_consistency():
    from zeromodes.asymptotics import nu

    for a, b in [(0.9, 3.0), (0.8, 1.5), (0.99, math.sqrt(3)), (0.6, 2.0)]:
        c = angle_constants(a, b)
        assert abs(c.xi + c.xi_prime - math.pi / 2) < 1e-14
        assert abs(c.eta + c.eta_prime - math.pi / 2) < 1e-14
        assert abs((c.j_hi - c.j_lo) - 2 * c.mu) < 1e-12
        assert abs(c.nu - nu(a, b)) < 1e-12
    with pytest.raises(OutOfDomain):
        angle_constants(0.3, 2.0)


def test_multiplicity_values():
    c = angle_constants(0.9, 3.0)
    mid = 0.5 * (c.j_lo + c.j_hi)
    assert multiplicity_m(mid, c) == 3.0
    assert multiplicity_m(mid + math.pi, c) == 1.0  # complement of the window
    assert multiplicity_m(c.j_lo, c) == 2.0
    assert multiplicity_m(c.j_hi + 6 * math.tau, c) == 2.0  # lattice periodicity


def test_rational_density_identities():
    got = rational_density(3, 1, 0.9)
    want = a_density(0.9, 3.0, rational_hint=(3, 1)).value / math.pi
    assert abs(got - want) < 1e-12

    # empty-window case: alpha barely supercritical, q = 1
    got = rational_density(5, 1, 0.21)
    assert abs(got - 1.0 / math.pi) < 1e-12

    with pytest.raises(OutOfDomain):
        rational_density(3, 1, 0.2)
    with pytest.raises(NotCoprime):
        rational_density(6, 2, 0.9)


def test_tangency_examples():
    assert tangency_test(TrigParams(1.0 / 3.0, 3.0), math.pi / 2)
    assert not tangency_test(TrigParams(0.5, 3.0), math.pi / 2)
    assert not tangency_test(TrigParams(0.9, 3.0), 1.2345)


def test_subcritical_exact_one_per_interval():
    p = TrigParams(0.5, 1.5)
    n_lo = brute_count(p, 20 * math.pi, math.pi / 12)
    n_hi = brute_count(p, 120 * math.pi, math.pi / 12)
    assert n_hi - n_lo == 100


def test_product_identity_near_alpha_one():
    # cos x + cos(beta x) factorises; near alpha = 1 the zero sets coincide
    beta = math.sqrt(2)
    p = TrigParams(0.999999, beta)
    n = brute_count(p, 500.0, math.pi / (8 * beta))
    xs = np.linspace(0.0, 500.0, 200001)
    prod = 2 * np.cos((beta + 1) / 2 * xs) * np.cos((beta - 1) / 2 * xs)
    sgn = np.sign(prod)
    n_prod = int(np.sum(sgn[:-1] * sgn[1:] < 0))
    assert n == n_prod


def test_perturbed_count_keeps_density():
    phi = Perturbation(
        value=lambda x: 0.2 * np.sin(x) / (1.0 + 0.01 * x * x),
        deriv=lambda x: 0.2 * (np.cos(x) / (1.0 + 0.01 * x * x)
                               - np.sin(x) * 0.02 * x / (1.0 + 0.01 * x * x) ** 2),
    )
    p = TrigParams(0.9, 3.0, phi)
    exact = rational_density(3, 1, 0.9)
    n = brute_count(p, 4000.0, math.pi / 24)
    assert abs(n / 4000.0 - exact) / exact < 0.02


def test_density_trace_monotone():
    rows = density_trace(TrigParams(0.9, 3.0), [100.0, 200.0, 400.0], math.pi / 24)
    counts = [r[1] for r in rows]
    assert counts == sorted(counts)
    assert rows[0][0] == 100.0
    assert rows[-1][2] == pytest.approx(counts[-1] / 400.0)


def test_irrational_brute_matches_closed_form_midscale():
    beta = 1.2 * math.sqrt(2)
    pred = a_density(0.9, beta).value / math.pi
    n = brute_count(TrigParams(0.9, beta), 2000.0, min(math.pi, math.pi / beta) / 8)
    assert abs(n / 2000.0 - pred) / pred < 0.02


def test_density_trace_csv(tmp_path):
    path = tmp_path / "trace.csv"
    density_trace_csv(TrigParams(0.9, 3.0), [50.0, 100.0], math.pi / 24, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "R,count,density"
    assert len(lines) == 3
    R, c, d = lines[1].split(",")
    assert float(d) == int(c) / float(R)


def test_degenerate_endpoint_case():
    # nu(0.8, 5) == 3, so the window endpoints land on the lattice
    with pytest.raises(DegenerateEndpoint):
        rational_density(5, 1, 0.8)


def test_unresolved_grazing_is_surfaced():
    # adversarial perturbation flattening f to ~1e-14 on a plateau: the scan
    # must refuse to guess the count there
    base = TrigParams(0.5, 3.0)
    w = lambda x: np.exp(-(((x - 30.0) / 1.5) ** 4))
    wp = lambda x: -4.0 * ((x - 30.0) / 1.5) ** 3 / 1.5 * w(x)
    f0 = lambda x: f_value(base, x)
    f0p = lambda x: -np.sin(x) - 1.5 * np.sin(3.0 * x)
    phi = Perturbation(
        value=lambda x: -f0(x) * w(x) + 1e-14,
        deriv=lambda x: -f0p(x) * w(x) - f0(x) * wp(x),
    )
    p = TrigParams(0.5, 3.0, phi)
    with pytest.raises(UnresolvedCell):
        scan_zeros(p, 20.0, 40.0, math.pi / 24)
