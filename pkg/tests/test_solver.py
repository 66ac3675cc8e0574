import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kolmogorov_problem import ppoly, psi, solver, verify
from kolmogorov_problem.errors import ConvergenceError, InfeasibleTriple, InvalidInstance, NotFeasible

WORKED = dict(r=4, k2=1, M0=1.0, Mk2=7 / 12, Mrm2=0.5, Mr=1.0)


def _norms(p, orders):
    out, g = {}, p
    for s in range(max(orders) + 1):
        if s in orders:
            out[s] = ppoly.sup_norm(g)
        g = ppoly.derivative(g)
    return out


def random_feasible_triple(rng, k, r):
    """(Mk, Mrm2, Mr) with a plateau length drawn from [0, 6]."""
    Mr = math.exp(rng.uniform(-3, 3))
    Mrm2 = math.exp(rng.uniform(-3, 3))
    b, lam = solver.scale_parameters(Mrm2, Mr, r)
    a_true = rng.uniform(0, 6)
    Mk = b * lam**k * psi.psi_norm(a_true, r - k)
    return Mk, Mrm2, Mr, a_true


# ---------- instance validation ----------

@pytest.mark.parametrize(
    "kwargs",
    [
        dict(WORKED, r=3),
        dict(WORKED, r=17),
        dict(WORKED, k2=0),
        dict(WORKED, k2=2),
        dict(WORKED, M0=0.0),
        dict(WORKED, Mr=-1.0),
        dict(WORKED, Mk2=float("nan")),
        dict(WORKED, Mrm2=float("inf")),
    ],
)
def test_instance_validation(kwargs):
    with pytest.raises(InvalidInstance):
        solver.ProblemInstance(**kwargs)


# ---------- solve_parameters ----------

def test_worked_parameters():
    p = solver.solve_parameters(7 / 12, 0.5, 1.0, 1, 4)
    assert p.a == pytest.approx(1.0, abs=1e-10)
    assert p.b == 1.0 and p.lam == 1.0
    assert p.psi_norm_value == pytest.approx(25 / 48, abs=1e-10)
    assert p.to_dict() == {"a": p.a, "b": 1.0, "lambda": 1.0}


def test_boundary_parameters():
    p = solver.solve_parameters(1 / 3, 0.5, 1.0, 1, 4)
    assert p.a <= 1e-8
    assert solver.psi_cap(1 / 3, 0.5, 1.0, 1, 4) == pytest.approx(5 / 24, abs=1e-10)


def test_infeasible_triple():
    with pytest.raises(InfeasibleTriple):
        solver.solve_parameters(0.2, 0.5, 1.0, 1, 4)


def test_scale_parameters_formula():
    b, lam = solver.scale_parameters(0.3, 2.0, 6)
    assert lam == pytest.approx(math.sqrt(2.0 / 0.6), rel=1e-15)
    assert b == pytest.approx(2.0 / lam**6, rel=1e-15)


@pytest.mark.parametrize("k,r", [(1, 4), (1, 5), (2, 5), (2, 6), (3, 6), (4, 8)])
def test_round_trip_recovers_plateau(k, r):
    rng = np.random.default_rng(1000 * r + k)
    for _ in range(5):
        Mk, Mrm2, Mr, a_true = random_feasible_triple(rng, k, r)
        p = solver.solve_parameters(Mk, Mrm2, Mr, k, r)
        assert p.a == pytest.approx(a_true, abs=1e-8 * (1 + a_true))
        n = _norms(p.comparison_function(), {k, r - 2, r})
        assert n[k] == pytest.approx(Mk, rel=1e-8)
        assert n[r - 2] == pytest.approx(Mrm2, rel=1e-10)
        assert n[r] == pytest.approx(Mr, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 20), st.floats(1e-6, 1.0))
def test_solution_equation_holds(c, frac):
    # Mk strictly above the a = 0 floor by a relative amount frac
    r, k, Mrm2, Mr = 5, 2, 0.7 * c, 1.9 * c
    b, lam = solver.scale_parameters(Mrm2, Mr, r)
    Mk = b * lam**k * psi.psi_norm(0.0, r - k) * (1 + frac)
    p = solver.solve_parameters(Mk, Mrm2, Mr, k, r)
    assert b * lam**k * psi.psi_norm(p.a, r - k) == pytest.approx(Mk, rel=1e-9)


def test_psi_cap_homogeneity():
    base = solver.solve_parameters(0.8, 0.6, 1.3, 1, 5)
    for c in (0.1, 3.0, 42.0):
        s = solver.solve_parameters(c * 0.8, c * 0.6, c * 1.3, 1, 5)
        assert s.a == pytest.approx(base.a, rel=1e-9)
        assert s.lam == pytest.approx(base.lam, rel=1e-14)
        assert s.b == pytest.approx(c * base.b, rel=1e-14)
        assert s.psi_norm_value == pytest.approx(c * base.psi_norm_value, rel=1e-9)


def test_psi_cap_continuity():
    Mk = 0.9
    c0 = solver.psi_cap(Mk, 0.5, 1.0, 1, 4)
    c1 = solver.psi_cap(Mk * (1 + 1e-6), 0.5, 1.0, 1, 4)
    assert abs(c1 - c0) <= 1e-4 * c0


def test_solver_monotone_bracket_diagnostic(monkeypatch):
    # a non-monotone N must be reported, not silently bisected
    calls = iter([0.1, 0.3, 0.6, 0.2] + [0.5] * 500)
    monkeypatch.setattr(solver, "psi_norm", lambda a, s: next(calls))
    with pytest.raises(ConvergenceError, match="not increasing|non-monotone"):
        solver._solve_plateau(0.5, 1.0, 1.0, 1, 4)


# ---------- decide / extremal ----------

def test_decide_worked_instance():
    rep = solver.decide(solver.ProblemInstance(**WORKED))
    assert rep.feasible and rep.extremal is not None
    assert rep.psi_cap == pytest.approx(25 / 48, abs=1e-10)
    assert rep.condition_b.margin == pytest.approx(23 / 48, abs=1e-10)
    t = np.linspace(0, 6, 601)
    expected = psi.build_psi(1.0, 4)(t) + 23 / 48
    assert np.max(np.abs(ppoly.evaluate(rep.extremal, t) - expected)) <= 1e-9
    norms = solver.extremal_norms(rep)
    for got, want in zip(norms, (1.0, 7 / 12, 0.5, 1.0)):
        assert got == pytest.approx(want, rel=1e-8)
    # independent re-measurement from point values
    cfg = verify.MeasurementConfig(grid_points=20_000)
    for k, want in zip((0, 1, 2, 4), (1.0, 7 / 12, 0.5, 1.0)):
        if k <= rep.extremal.smoothness + 1:
            assert verify.measure_norm(rep.extremal, k, cfg) == pytest.approx(want, rel=1e-5)


def test_decide_condition_b_fails():
    rep = solver.decide(solver.ProblemInstance(**dict(WORKED, M0=0.4)))
    assert not rep.feasible
    assert rep.condition_a.holds and not rep.condition_b.holds
    assert rep.condition_b.margin == pytest.approx(0.4 - 25 / 48, abs=1e-10)
    assert rep.extremal is None
    with pytest.raises(NotFeasible):
        solver.extremal_norms(rep)


def test_decide_condition_a_fails():
    rep = solver.decide(solver.ProblemInstance(**dict(WORKED, Mk2=0.2)))
    assert not rep.feasible and not rep.condition_a.holds
    assert rep.params is None and rep.extremal is None and rep.psi_cap is None
    assert rep.condition_b.diagnostic_only
    assert rep.condition_a.margin < 0
    d = rep.to_dict()
    assert d["params"] is None and d["psi_cap"] is None and d["feasible"] is False


def test_decide_exact_boundary_m0():
    cap = solver.psi_cap(7 / 12, 0.5, 1.0, 1, 4)
    rep = solver.decide(solver.ProblemInstance(**dict(WORKED, M0=cap)))
    assert rep.feasible and rep.condition_b.margin == 0.0
    t = np.linspace(0, 6, 301)
    Psi = rep.params.comparison_function()
    assert np.array_equal(ppoly.evaluate(rep.extremal, t), ppoly.evaluate(Psi, t))


def test_decide_boundary_instance():
    rep = solver.decide(solver.ProblemInstance(**dict(WORKED, Mk2=1 / 3)))
    assert rep.feasible and rep.params.a <= 1e-8


def test_extremal_norms_scale_linearly():
    base = solver.extremal_norms(solver.decide(solver.ProblemInstance(**WORKED)))
    inst = solver.ProblemInstance(**WORKED).scaled(3.0)
    scaled = solver.extremal_norms(solver.decide(inst))
    for x, y in zip(base, scaled):
        assert y == pytest.approx(3 * x, rel=1e-9)


@pytest.mark.parametrize("r", [4, 5, 6])
def test_random_feasible_instances(r):
    rng = np.random.default_rng(r)
    for _ in range(50 // 3 + 1):
        k = int(rng.integers(1, r - 2))
        Mk, Mrm2, Mr, _ = random_feasible_triple(rng, k, r)
        cap = solver.psi_cap(Mk, Mrm2, Mr, k, r)
        M0 = cap * rng.uniform(1.0, 3.0)
        rep = solver.decide(solver.ProblemInstance(r, k, M0, Mk, Mrm2, Mr))
        assert rep.feasible
        for got, want in zip(solver.extremal_norms(rep), (M0, Mk, Mrm2, Mr)):
            assert got == pytest.approx(want, rel=1e-8)
        # the order r - 2 norm is fixed independently of the plateau
        assert _norms(rep.params.comparison_function(), {r - 2})[r - 2] == pytest.approx(Mrm2, rel=1e-12)


def test_report_json_shape():
    d = solver.decide(solver.ProblemInstance(**WORKED)).to_dict()
    assert set(d) == {"feasible", "condition_a", "condition_b", "params", "psi_cap"}
    assert set(d["params"]) == {"a", "b", "lambda"}
