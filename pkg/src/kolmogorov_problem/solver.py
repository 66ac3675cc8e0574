"""Feasibility and extremal functions for the (0, k, r-2, r) Kolmogorov problem.

Given targets ``M_0, M_k, M_{r-2}, M_r`` the comparison function is
``Psi(t) = b * psi_r(a; lam * t)`` with

    lam = sqrt(M_r / (2 M_{r-2})),   b = M_r / lam**r,

which fixes ``||Psi^(r)|| = M_r`` and ``||Psi^(r-2)|| = M_{r-2}`` for every
plateau length ``a``. The remaining equation
``b * lam**k * N_{r-k}(a) = M_k`` is solved for ``a`` by bisection, using that
``N_s`` is increasing and unbounded in ``a`` for ``s >= 3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import euler, ppoly
from .errors import ConvergenceError, InfeasibleTriple, InvalidInstance, NotFeasible
from .euler import ConditionResult
from .ppoly import PeriodicPiecewisePoly
from .psi import R_MAX, build_psi, psi_norm

SOLVER_TOL = 1e-10
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class ProblemInstance:
    r: int
    k2: int
    M0: float
    Mk2: float
    Mrm2: float
    Mr: float

    def __post_init__(self):
        if not (4 <= self.r <= R_MAX):
            raise InvalidInstance(f"r must satisfy 4 <= r <= {R_MAX}, got {self.r}")
        if not (0 < self.k2 < self.r - 2):
            raise InvalidInstance(f"k2 must satisfy 0 < k2 < r - 2 = {self.r - 2}, got {self.k2}")
        for name in ("M0", "Mk2", "Mrm2", "Mr"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidInstance(f"{name} must be a positive finite number, got {v!r}")

    @property
    def targets(self) -> tuple[float, float, float, float]:
        return self.M0, self.Mk2, self.Mrm2, self.Mr

    def scaled(self, c: float) -> ProblemInstance:
        return ProblemInstance(self.r, self.k2, c * self.M0, c * self.Mk2, c * self.Mrm2, c * self.Mr)

    def to_dict(self) -> dict:
        return {"r": self.r, "k2": self.k2, "M0": self.M0, "Mk2": self.Mk2, "Mrm2": self.Mrm2, "Mr": self.Mr}


@dataclass(frozen=True)
class SolvedParameters:
    a: float
    b: float
    lam: float
    r: int
    psi_norm_value: float
    iterations: int = 0

    def comparison_function(self) -> PeriodicPiecewisePoly:
        """``Psi(t) = b * psi_r(a; lam * t)`` as a piecewise polynomial."""
        return ppoly.scale(build_psi(self.a, self.r).f, self.b, self.lam)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "lambda": self.lam}


def scale_parameters(Mrm2: float, Mr: float, r: int) -> tuple[float, float]:
    """``(b, lam)`` fixing the norms of orders r-2 and r."""
    lam = math.sqrt(Mr) / math.sqrt(2.0 * Mrm2)
    return Mr / lam**r, lam


def _solve_plateau(Mk: float, b: float, lam: float, k: int, r: int) -> tuple[float, int]:
    amp = b * lam**k
    s = r - k
    tol = SOLVER_TOL * (1.0 + Mk)

    def g(a: float) -> float:
        return amp * psi_norm(a, s) - Mk

    g0 = g(0.0)
    if g0 > tol:
        raise InfeasibleTriple(f"minimum achievable M_k is {Mk + g0!r} > {Mk!r}")
    if g0 >= -tol:
        return 0.0, 0
    lo, hi = 0.0, 1.0
    g_lo, g_hi = g0, g(hi)
    iterations = 0
    while g_hi < 0:
        if g_hi < g_lo:
            raise ConvergenceError(f"N_{s} not increasing between a={lo} and a={hi}")
        lo, g_lo = hi, g_hi
        hi *= 2.0
        g_hi = g(hi)
        iterations += 1
        if iterations > 60:
            raise ConvergenceError("failed to bracket the plateau length")
    while hi - lo > 1e-12 * (1.0 + lo):
        if iterations >= MAX_BISECTIONS:
            raise ConvergenceError(f"bisection did not converge: bracket [{lo!r}, {hi!r}]")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        noise = 1e-14 * (1.0 + Mk)
        if not (g_lo - noise <= g_mid <= g_hi + noise):
            raise ConvergenceError(f"non-monotone objective at a={mid!r}")
        if g_mid < 0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
        iterations += 1
    a = lo if abs(g_lo) <= abs(g_hi) else hi
    return a, iterations


def solve_parameters(Mk: float, Mrm2: float, Mr: float, k: int, r: int) -> SolvedParameters:
    """Find ``(a, b, lam)`` with ``||Psi^(s)|| = M_s`` for ``s in {k, r-2, r}``.

    Raises:
        InfeasibleTriple: the triple violates the three-number Kolmogorov
            inequality, i.e. even ``a = 0`` overshoots ``M_k``.
    """
    euler.rm2_bound(Mk, Mr, k, r)  # validates orders and positivity
    if not Mrm2 > 0:
        raise ValueError("Mrm2 must be positive")
    b, lam = scale_parameters(Mrm2, Mr, r)
    a, iterations = _solve_plateau(Mk, b, lam, k, r)
    return SolvedParameters(a, b, lam, r, b * psi_norm(a, r), iterations)


def psi_cap(Mk: float, Mrm2: float, Mr: float, k: int, r: int) -> float:
    """``||Psi_r(M_k, M_{r-2}, M_r)||``, the smallest admissible ``M_0``."""
    return solve_parameters(Mk, Mrm2, Mr, k, r).psi_norm_value


@dataclass(frozen=True)
class FeasibilityReport:
    instance: ProblemInstance
    condition_a: ConditionResult
    condition_b: ConditionResult
    params: SolvedParameters | None = None
    extremal: PeriodicPiecewisePoly | None = None

    @property
    def feasible(self) -> bool:
        return self.condition_a.holds and self.condition_b.holds

    @property
    def psi_cap(self) -> float | None:
        return None if self.params is None else self.params.psi_norm_value

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "condition_a": self.condition_a.to_dict(),
            "condition_b": self.condition_b.to_dict(),
            "params": None if self.params is None else self.params.to_dict(),
            "psi_cap": self.psi_cap,
        }


def decide(inst: ProblemInstance) -> FeasibilityReport:
    """Evaluate both conditions and, when feasible, build the extremal function.

    The extremal function is ``Psi(t) + M_0 - ||Psi||``. When condition a)
    fails, condition b) is still evaluated with the plateau clamped to
    ``a = 0`` and flagged ``diagnostic_only``.
    """
    r, k = inst.r, inst.k2
    cond_a = euler.condition_a(inst.Mk2, inst.Mrm2, inst.Mr, k, r)
    params = None
    if cond_a.holds:
        try:
            params = solve_parameters(inst.Mk2, inst.Mrm2, inst.Mr, k, r)
        except InfeasibleTriple:
            # within the feasibility slack of the a = 0 boundary
            b, lam = scale_parameters(inst.Mrm2, inst.Mr, r)
            params = SolvedParameters(0.0, b, lam, r, b * psi_norm(0.0, r))
    if params is None:
        b, _ = scale_parameters(inst.Mrm2, inst.Mr, r)
        cap = b * psi_norm(0.0, r)
        margin = inst.M0 - cap
        cond_b = ConditionResult(
            holds=margin >= -euler.feasibility_slack(cap),
            margin=margin,
            bound=cap,
            relative_margin=margin / cap,
            diagnostic_only=True,
        )
        return FeasibilityReport(inst, cond_a, cond_b)
    cap = params.psi_norm_value
    margin = inst.M0 - cap
    cond_b = ConditionResult(
        holds=margin >= -euler.feasibility_slack(cap),
        margin=margin,
        bound=cap,
        relative_margin=margin / cap,
    )
    extremal = None
    if cond_b.holds:
        extremal = ppoly.add_constant(params.comparison_function(), inst.M0 - cap)
    return FeasibilityReport(inst, cond_a, cond_b, params, extremal)


def extremal_norms(report: FeasibilityReport) -> tuple[float, float, float, float]:
    """``(||x||, ||x^(k2)||, ||x^(r-2)||, ||x^(r)||)`` of the extremal function."""
    if not report.feasible or report.extremal is None:
        raise NotFeasible("no extremal function: the instance is infeasible")
    r, k = report.instance.r, report.instance.k2
    out = {}
    g = report.extremal
    for order in range(r + 1):
        if order in (0, k, r - 2, r):
            out[order] = ppoly.sup_norm(g)
        if order < r:
            g = ppoly.derivative(g)
    return out[0], out[k], out[r - 2], out[r]
