import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kolmogorov_problem import ppoly, psi, solver, verify
from kolmogorov_problem.errors import HypothesisNotMet, LevelOutOfRange, StepTooLarge

FAST = verify.MeasurementConfig(grid_points=5000)


def _comparison_function(r, k, stretch=1.5):
    b, lam = solver.scale_parameters(1.0, 1.0, r)
    Mk = stretch * b * lam**k * psi.psi_norm(0.0, r - k)
    return solver.solve_parameters(Mk, 1.0, 1.0, k, r).comparison_function()


# ---------- configuration and weights ----------

def test_config_validation():
    with pytest.raises(ValueError):
        verify.MeasurementConfig(grid_points=999)
    with pytest.raises(ValueError):
        verify.MeasurementConfig(fd_order=3)
    with pytest.raises(ValueError):
        verify.MeasurementConfig(fd_step=0.0)
    assert verify.MeasurementConfig().to_dict() == {"grid_points": 200_000, "fd_step": 1e-5, "fd_order": 4}


def test_fd_weights_classic_stencils():
    assert np.allclose(verify.fd_weights(1.0, 3, 2), [[1, -2, 1]])
    assert np.allclose(verify.fd_weights(1.0, 3, 1), [[-0.5, 0, 0.5]])
    assert np.allclose(verify.fd_weights(2.0, 5, 1), [[1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]])
    # one-sided second-order first derivative
    assert np.allclose(verify.fd_weights(0.0, 3, 1), [[-1.5, 2, -0.5]])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.floats(0, 6), st.integers(0, 2**32 - 1))
def test_fd_weights_exact_on_polynomials(k, z, seed):
    n = 7
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n)
    poly = np.polynomial.Polynomial(c)
    w = verify.fd_weights(z, n, k)[0]
    assert w @ poly(np.arange(n)) == pytest.approx(poly.deriv(k)(z), rel=1e-8, abs=1e-8)


# ---------- measure_norm ----------

def test_measure_norm_examples():
    assert verify.measure_norm(psi.build_psi(1.0, 2).f, 0) == pytest.approx(0.5, abs=1e-6)
    assert verify.measure_norm(psi.build_psi(1.0, 4).f, 1) == pytest.approx(7 / 12, abs=1e-5)
    const = ppoly.constant(2.0, 3.0)
    for k in (1, 2, 5):
        assert verify.measure_norm(const, k, FAST) <= 1e-8


def test_measure_norm_errors():
    f = psi.build_psi(0.0, 3).f
    with pytest.raises(StepTooLarge):
        verify.measure_norm(f, 1, verify.MeasurementConfig(fd_step=0.05))
    with pytest.raises(ValueError):
        verify.measure_norm(f, 4)
    with pytest.raises(ValueError):
        verify.measure_norm(f, -1)


@pytest.mark.parametrize("r", range(1, 9))
def test_cross_oracle_norm_agreement(r):
    for a in (0.0, 0.5, 1.0, 3.0):
        g = psi.build_psi(a, r).f
        for k in range(r):
            exact = ppoly.sup_norm(g)
            fd = verify.measure_norm(psi.build_psi(a, r).f, k)
            assert abs(fd - exact) <= 1e-5 * (1 + exact), (r, a, k)
            g = ppoly.derivative(g)


def test_measure_norm_on_sinusoid():
    x = verify.sinusoid(0.7, 2.3)
    for k in range(4):
        assert verify.measure_norm(x, k, FAST) == pytest.approx(0.7 * 2.3**k, rel=1e-5)


# ---------- level_speed ----------

def test_level_speed_extremes_are_zero():
    Psi = psi.build_psi(1.0, 4).f
    S = ppoly.sup_norm(Psi)
    assert verify.level_speed(Psi, S) == 0.0
    assert verify.level_speed(Psi, -S) == 0.0
    assert verify.level_speed(psi.build_psi(2.0, 2).f, -0.5) == 0.0


def test_level_speed_at_zero_of_psi2():
    # psi_2(0; .) vanishes at 0 where |psi_1(0; 0)| = 1
    assert verify.level_speed(psi.build_psi(0.0, 2).f, 0.0) == pytest.approx(1.0, abs=1e-10)
    assert verify.level_speed(psi.build_psi(0.0, 2).f, 0.0, branch="falling") == pytest.approx(1.0, abs=1e-10)


def test_level_speed_out_of_range():
    Psi = psi.build_psi(1.0, 3).f
    with pytest.raises(LevelOutOfRange):
        verify.level_speed(Psi, 1.01 * ppoly.sup_norm(Psi))


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("a", [0.0, 0.7, 2.0])
def test_level_speed_branch_independence(r, a):
    Psi = psi.build_psi(a, r).f
    S = ppoly.sup_norm(Psi)
    v = np.linspace(-S, S, 401)[1:-1]
    up = verify.level_speed(Psi, v, "rising")
    down = verify.level_speed(Psi, v, "falling")
    assert np.max(np.abs(up - down)) <= 1e-9


def test_level_speed_matches_direct_evaluation():
    Psi = psi.build_psi(1.0, 3).f
    dPsi = ppoly.derivative(Psi)
    # psi_3 falls monotonically from its max at 0 to its min at a + 2
    xi = np.linspace(0.05, 2.95, 50)
    v = ppoly.evaluate(Psi, xi)
    assert np.allclose(verify.level_speed(Psi, v), np.abs(ppoly.evaluate(dPsi, xi)), atol=1e-9)


# ---------- sinusoids ----------

@pytest.mark.parametrize("omega", [0.2, 1.0, 7.5])
def test_sinusoid_interpolation_error(omega):
    A = 1.7
    x = verify.sinusoid(A, omega)
    t = np.linspace(0, x.period, 400_001)
    err = np.max(np.abs(ppoly.evaluate(x, t) - A * np.sin(omega * t)))
    assert err <= verify.sinusoid_interpolation_bound(A) + 4e-16 * A
    assert verify.sinusoid_interpolation_bound(1.0) < 1e-12
    assert x.smoothness == 5
    assert x.period == pytest.approx(2 * math.pi / omega, rel=1e-15)


def test_sinusoid_derivative_norms():
    A, w = 0.4, 3.0
    g = verify.sinusoid(A, w)
    for k in range(7):
        assert ppoly.sup_norm(g) == pytest.approx(A * w**k, rel=1e-6)
        g = ppoly.derivative(g)


# ---------- comparison and bound checks ----------

@pytest.mark.parametrize("r,k", [(4, 1), (5, 2), (6, 3)])
def test_comparison_identity(r, k):
    Psi = _comparison_function(r, k)
    res = verify.comparison_check(Psi, Psi, r, cfg=FAST)
    assert res.ok and res.worst_violation <= res.tolerance
    b = verify.k2_bound_check(Psi, Psi, k, r)
    assert b.ok and b.lhs == b.rhs


def test_scaled_psi_bound():
    Psi = _comparison_function(5, 1)
    x = ppoly.scale(Psi, 0.9, 1.0)
    b = verify.k2_bound_check(x, Psi, 1, 5)
    assert b.ok and b.lhs == pytest.approx(0.9 * b.rhs, rel=1e-13)
    assert verify.comparison_check(x, Psi, 5, cfg=FAST).ok


def test_hypothesis_violation_is_an_error():
    Psi = _comparison_function(4, 1)
    x = ppoly.scale(Psi, 1.5, 1.0)
    with pytest.raises(HypothesisNotMet):
        verify.comparison_check(x, Psi, 4, cfg=FAST)
    with pytest.raises(HypothesisNotMet):
        verify.k2_bound_check(x, Psi, 1, 4)
    report = verify.comparison_report(x, Psi, 4, FAST)
    assert report["hypothesis_met"] is False and report["ok"] is False


def test_check_is_not_vacuous():
    # dropping the order r - 2 and r constraints admits fast oscillations that beat Psi'
    Psi = _comparison_function(4, 1)
    x = verify.sinusoid(0.5 * ppoly.sup_norm(Psi), 20.0)
    res = verify.comparison_check(x, Psi, 4, k_list=[0], cfg=FAST)
    assert not res.ok and res.worst_violation > 1.0


@pytest.mark.parametrize("r,k", [(4, 1), (5, 2), (6, 2)])
def test_random_sinusoids_pass(r, k):
    Psi = _comparison_function(r, k, stretch=2.0)
    rng = np.random.default_rng(7 * r + k)
    for _ in range(15):
        x, A, omega = verify.random_sinusoid(Psi, r, rng)
        x = ppoly.shift(x, rng.uniform(0, x.period))
        res = verify.comparison_check(x, Psi, r, cfg=FAST)
        assert res.ok, (A, omega, res)
        assert verify.k2_bound_check(x, Psi, k, r).ok


def test_comparison_report_shape():
    Psi = _comparison_function(4, 1)
    rep = verify.comparison_report(Psi, Psi, 4, FAST)
    assert set(rep) == {"hypothesis_met", "ok", "worst_violation", "config"}
    assert rep["hypothesis_met"] and rep["ok"]
    json.dumps(rep)
