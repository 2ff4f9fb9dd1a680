import math

import numpy as np
import pytest

from zeromodes.closedform import gap_angle_relation_check
from zeromodes.errors import NonPositiveK
from zeromodes.potential import build_w, l1_norm
from zeromodes.prufer import (
    PruferState,
    choose_truncation,
    delta_curve,
    delta_derivative,
    delta_grid,
    delta_v,
    is_eigenvalue,
    propagate,
    tail_angle_bound,
    truncation_bound,
)
from conftest import antisymmetric_pair, gap_pair, square_bump


def test_delta_at_zero_coupling():
    for V in (square_bump(), gap_pair(1.0, 2.0), antisymmetric_pair(1.0)):
        assert abs(delta_v(V, 0.0, 1.0)) < 1e-12


def test_delta_at_zero_coupling_analytic(sech_well):
    assert abs(delta_v(sech_well, 0.0, 1.0)) < 1e-10


def test_k_must_be_positive():
    with pytest.raises(NonPositiveK):
        delta_v(square_bump(), 1.0, 0.0)
    with pytest.raises(NonPositiveK):
        delta_v(square_bump(), 1.0, -2.0)


def test_gap_fixed_point():
    # theta = pi/4 is a stationary solution across a zero piece
    V = build_w([0.0, 5.0], [0.0])
    s = PruferState(math.pi / 4, 5.0, 3.0, 1.0)
    out = propagate(s, V, 0.0)
    assert abs(out.theta - math.pi / 4) < 1e-12


def test_gap_relation_for_propagated_angles():
    V = build_w([0.0, 2.0], [0.0])
    rng = np.random.RandomState(21)
    for _ in range(10):
        th0 = rng.uniform(-math.pi, math.pi)
        k = rng.uniform(0.5, 2.0)
        out = propagate(PruferState(th0, 0.0, 1.7, k), V, 2.0)
        assert abs(gap_angle_relation_check(th0, out.theta, k, 2.0)) < 1e-8


def test_exact_vs_ode_propagation():
    V = gap_pair(1.0, 2.0)
    for gamma in (0.5, 2.0, 7.3):
        s = PruferState(-math.pi / 4, 2.0, gamma, 1.0)
        exact = propagate(s, V, -2.0, method="exact").theta
        ode = propagate(s, V, -2.0, method="ode").theta
        assert abs(exact - ode) < 1e-8


def test_propagate_round_trip():
    V = gap_pair(0.5, 1.5)
    s0 = PruferState(0.3, -3.0, 4.0, 1.0)
    fwd = propagate(s0, V, 2.0)
    back = propagate(fwd, V, -3.0)
    assert abs(back.theta - s0.theta) < 1e-9


def test_delta_monotone_for_single_sign():
    V = square_bump()
    gs = np.linspace(0.0, 12.0, 120)
    ds = delta_grid(V, gs, 1.0)
    assert np.all(np.diff(ds) > 0)


def test_delta_slope_approaches_integral():
    V = square_bump()
    d = delta_v(V, 200.0, 1.0)
    assert abs(d / 200.0 - 2.0) < 0.05


def test_membership_examples(sech_well):
    assert is_eigenvalue(sech_well, 1.5, 1.0, tol=1e-6).is_root
    assert is_eigenvalue(sech_well, 2.5, 1.0, tol=1e-6).is_root
    assert not is_eigenvalue(sech_well, 0.5, 1.0, tol=1e-6).is_root
    for V in (square_bump(), antisymmetric_pair(1.0)):
        assert not is_eigenvalue(V, 0.0, 1.0, tol=1e-6).is_root


def test_membership_symmetric_under_negation():
    from test_closedform import bump_oracle_roots

    V = square_bump()
    for r in bump_oracle_roots(10.0):
        assert is_eigenvalue(V, r, 1.0, tol=1e-7).is_root
        assert is_eigenvalue(V, -r, 1.0, tol=1e-7).is_root


def test_first_root_agrees_with_determinant():
    from test_closedform import bump_oracle_roots

    first = bump_oracle_roots(3.0)[0]
    chk = is_eigenvalue(square_bump(), first, 1.0, tol=1e-8)
    assert chk.is_root


def test_tail_angle_bound_properties():
    assert tail_angle_bound(0.0) == 0.0
    for a in np.linspace(0.0, math.pi / 2 - 1e-9, 20):
        assert tail_angle_bound(a) == a
    rng = np.random.RandomState(4)
    for _ in range(50):
        a, b = rng.uniform(0, 20, 2)
        ha, hb = tail_angle_bound(a), tail_angle_bound(b)
        assert a <= ha <= 2 * a + 1e-15
        assert ha + hb <= tail_angle_bound(a + b) + 1e-12
    assert tail_angle_bound(1.0) <= tail_angle_bound(1.5)


def test_truncation_bound(sech_well):
    assert truncation_bound(sech_well, 3.0, 40.0) < 1e-8
    assert truncation_bound(sech_well, 0.0, 2.0) == 0.0
    X = choose_truncation(sech_well, 5.0)
    assert truncation_bound(sech_well, 5.0, X) < 1e-8


def test_uniform_delta_bound():
    for V in (square_bump(), gap_pair(1.0, 2.0), antisymmetric_pair(1.0)):
        norm = l1_norm(V)
        gs = np.linspace(0.0, 30.0, 200)
        ds = delta_grid(V, gs, 1.0)
        for g, d in zip(gs, ds):
            assert abs(d) <= tail_angle_bound(abs(g) * norm) + 1e-9


def test_uniform_delta_bound_analytic(sech_well):
    norm = l1_norm(sech_well)
    for g in (0.5, 2.0, 5.0):
        d = delta_v(sech_well, g, 1.0)
        assert abs(d) <= tail_angle_bound(g * norm) + 1e-8


def test_delta_derivative_positive_and_matches_fd():
    for V in (square_bump(), build_w([0.0, 1.0, 2.0], [2.0, 1.0])):
        d = delta_derivative(V, 3.0, 1.0)
        assert d > 0
        h = 1e-5
        fd = (delta_v(V, 3.0 + h, 1.0) - delta_v(V, 3.0 - h, 1.0)) / (2 * h)
        assert abs(d - fd) < 1e-5


def test_delta_derivative_analytic_matches_fd(sech_well):
    d = delta_derivative(sech_well, 1.0, 1.0)
    assert d < 0  # nonpositive potential: defect decreasing
    h = 1e-5
    fd = (delta_v(sech_well, 1.0 + h, 1.0) - delta_v(sech_well, 1.0 - h, 1.0)) / (2 * h)
    assert abs(d - fd) < 1e-5


def test_delta_derivative_zero_potential():
    assert delta_derivative(build_w([0.0, 1.0], [0.0]), 2.0, 1.0) == 0.0


def test_single_sign_crossing_count():
    # each half-integer level is crossed exactly once (strict monotonicity)
    V = square_bump()
    R = 30.0
    gs = np.linspace(0.0, R, 600)
    ds = delta_grid(V, gs, 1.0)
    crossings = 0
    for a, b in zip(ds, ds[1:]):
        crossings += len(range(math.ceil(a / math.pi - 0.5 + 1e-12),
                               math.floor(b / math.pi - 0.5 - 1e-12) + 1))
    expected = math.floor(delta_v(V, R, 1.0) / math.pi + 0.5)
    assert crossings == expected


def test_antisymmetric_is_never_eigen():
    V = antisymmetric_pair(1.0)
    rng = np.random.RandomState(17)
    for g in rng.uniform(0.1, 50.0, 25):
        assert not is_eigenvalue(V, float(g), 1.0, tol=1e-6).is_root


def test_delta_grid_matches_scalar(sech_well):
    gs = [0.0, 0.7, 1.9]
    grid = delta_grid(sech_well, gs, 1.0)
    for g, d in zip(gs, grid):
        assert abs(d - delta_v(sech_well, g, 1.0)) < 1e-9


def test_delta_curve_csv(tmp_path):
    V = square_bump()
    curve = delta_curve(V, [0.0, 1.0, 2.0], 1.0)
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "gamma,delta,method"
    assert len(lines) == 4
    assert lines[1].endswith("exact-piecewise")
    assert float(lines[1].split(",")[1]) == pytest.approx(0.0, abs=1e-12)
