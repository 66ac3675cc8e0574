"""Independent numerical oracles.

``measure_norm`` re-measures derivative norms from point values only (finite
differences on a dense grid), so it shares no code path with
:func:`ppoly.derivative`. ``comparison_check`` and ``k2_bound_check`` turn the
comparison theorem and the Kolmogorov-type bound for ``||x^(k2)||`` into
runtime properties that can be falsified on concrete pairs ``(x, Psi)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import ppoly
from .errors import HypothesisNotMet, LevelOutOfRange, StepTooLarge
from .ppoly import PeriodicPiecewisePoly, _horner

HYPOTHESIS_REL = 1e-10
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class MeasurementConfig:
    """Sampling parameters for the finite-difference oracle.

    ``fd_step`` is the smallest step used; a k-th derivative with stencil
    accuracy ``fd_order`` steps by ``max(fd_step, eps ** (1 / (k + fd_order)))``,
    the usual balance point between truncation and rounding error.
    """

    grid_points: int = 200_000
    fd_step: float = 1e-5
    fd_order: int = 4

    def __post_init__(self):
        if self.grid_points < 1000:
            raise ValueError("grid_points must be >= 1000")
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def fd_weights(z: np.ndarray, nodes, k: int) -> np.ndarray:
    """Fornberg weights for the k-th derivative at each ``z`` from values at ``nodes``.

    ``nodes`` is an int ``n`` (meaning ``0, 1, ..., n-1``) or a 1-D array;
    returns an array of shape ``(len(z), n)``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = np.arange(nodes, dtype=float) if np.ndim(nodes) == 0 else np.asarray(nodes, dtype=float)
    n = x.size
    c = np.zeros((z.size, n, k + 1))
    c[:, 0, 0] = 1.0
    c1 = np.ones(z.size)
    c4 = x[0] - z
    for i in range(1, n):
        mn = min(i, k)
        c2 = np.ones(z.size)
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 = c2 * c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[:, i, m] = c1 * (m * c[:, i - 1, m - 1] - c5 * c[:, i - 1, m]) / c2
                c[:, i, 0] = -c1 * c5 * c[:, i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[:, j, m] = (c4 * c[:, j, m] - m * c[:, j, m - 1]) / c3
            c[:, j, 0] = c4 * c[:, j, 0] / c3
        c1 = c2
    return c[:, :, k]


def measure_norm(
    p: PeriodicPiecewisePoly, derivative_order: int, cfg: MeasurementConfig | None = None
) -> float:
    """Estimate ``||p^(k)||`` from samples of ``p`` alone.

    Samples are a uniform grid of ``cfg.grid_points`` per period plus both
    one-sided ends of every piece. At each sample the k-th derivative comes
    from ``k + fd_order`` equispaced values kept inside the sample's piece:
    centred where the piece allows, shifted toward the interior near its ends
    (Fornberg weights for the off-centre evaluation point). Keeping stencils
    inside a piece avoids smearing kinks of ``p^(k)``. When the stencil would
    need at least ``degree + 1`` values, the piece is instead sampled at
    ``degree + 1`` Chebyshev-Lobatto points, interpolated and differentiated
    in the Chebyshev basis, which is exact up to rounding. Error is
    ``O(h**fd_order)`` within pieces plus the grid gap for ``k = 0``.

    Raises:
        StepTooLarge: if ``fd_step >= period / 100``.
    """
    cfg = cfg or MeasurementConfig()
    k = int(derivative_order)
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    if k > p.smoothness + 1:
        raise ValueError(f"derivative order {k} exceeds smoothness + 1 = {p.smoothness + 1}")
    T = p.period
    if cfg.fd_step >= T / 100:
        raise StepTooLarge(f"fd_step {cfg.fd_step} >= period/100 = {T / 100}")
    tau = T * np.arange(cfg.grid_points) / cfg.grid_points
    j = np.clip(np.searchsorted(p.breakpoints, tau, side="right") - 1, 0, p.n_pieces - 1)
    u = tau - p.breakpoints[j]
    w = p.widths
    m = p.n_pieces
    j = np.concatenate([j, np.arange(m), np.arange(m)])
    u = np.concatenate([u, np.zeros(m), w])
    if k == 0:
        return float(np.max(np.abs(ppoly.evaluate(p, p.breakpoints[j] + u))))
    n = k + cfg.fd_order
    if n >= p.degree + 1:
        # degree + 1 values determine a polynomial piece exactly; taking them at
        # Chebyshev-Lobatto points of the piece keeps the differentiation well
        # conditioned up to the piece ends
        n = max(p.degree + 1, k + 1)
        x = np.cos(np.pi * np.arange(n) / (n - 1))
        est = np.zeros(j.size)
        for piece in range(m):
            sel = j == piece
            wp = w[piece]
            vals = _horner(np.broadcast_to(p.coeffs[piece], (n, p.degree + 1)), 0.5 * wp * (1.0 + x))
            interp = np.polynomial.Chebyshev.fit(x, vals, n - 1, domain=[-1, 1]).deriv(k)
            est[sel] = interp(2.0 * u[sel] / wp - 1.0) * (2.0 / wp) ** k
        return float(np.max(np.abs(est)))
    step = max(cfg.fd_step, _EPS ** (1.0 / (k + cfg.fd_order)))
    h = np.minimum(step, w / (n - 1))[j]
    centre = 0.5 * (n - 1)
    lo = (n - 1) - (w[j] - u) / h
    hi = u / h
    z = np.clip(np.clip(centre, lo, np.maximum(lo, hi)), 0.0, n - 1.0)
    z_unique, inverse = np.unique(z, return_inverse=True)
    weights = fd_weights(z_unique, n, k)[inverse]
    # stencils never leave their piece, so evaluate that piece's polynomial directly
    c = p.coeffs[j]
    base = u - z * h
    est = np.zeros(j.size)
    for i in range(n):
        est += weights[:, i] * _horner(c, base + i * h)
    est /= h**k
    return float(np.max(np.abs(est)))


class _Branch:
    """A monotone branch of ``Psi`` between its global minimum and maximum."""

    def __init__(self, Psi: PeriodicPiecewisePoly, rising: bool = True, table: int = 2049):
        self.Psi = Psi
        self.dPsi = ppoly.derivative(Psi)
        t_min, self.vmin, t_max, self.vmax = ppoly.extreme_points(Psi)
        T = Psi.period
        start, end = (t_min, t_max) if rising else (t_max, t_min)
        if end <= start:
            end += T
        self.sign = 1.0 if rising else -1.0
        self.start, self.end = start, end
        self.t = np.linspace(start, end, table)
        vals = self.sign * ppoly.evaluate(Psi, self.t)
        self.vals = np.maximum.accumulate(vals)

    def preimage(self, v: np.ndarray) -> np.ndarray:
        target = self.sign * v
        i = np.clip(np.searchsorted(self.vals, target) - 1, 0, self.t.size - 2)
        lo, hi = self.t[i], self.t[i + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.sign * ppoly.evaluate(self.Psi, mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4 * np.spacing(np.maximum(np.abs(hi), 1.0))):
                break
        return 0.5 * (lo + hi)

    def speed(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        inner = (v > self.vmin) & (v < self.vmax)
        out = np.zeros(v.shape)
        if np.any(inner):
            xi = self.preimage(v[inner])
            out[inner] = np.abs(ppoly.evaluate(self.dPsi, xi))
        return out


def level_speed(Psi: PeriodicPiecewisePoly, v, branch: str = "rising"):
    """``|Psi'(xi)|`` at a point ``xi`` with ``Psi(xi) = v``.

    The preimage is found by bisection on one monotone branch (``"rising"`` or
    ``"falling"``); at the extreme levels the speed is 0.

    Raises:
        LevelOutOfRange: if ``|v| > ||Psi|| * (1 + 1e-12)``.
    """
    scalar = np.ndim(v) == 0
    v = np.atleast_1d(np.asarray(v, dtype=float))
    S = ppoly.sup_norm(Psi)
    if np.any(np.abs(v) > S * (1 + 1e-12)):
        raise LevelOutOfRange(f"level outside [-{S}, {S}]")
    out = _Branch(Psi, rising=(branch == "rising")).speed(v)
    return float(out[0]) if scalar else out


def _nth_derivative(p: PeriodicPiecewisePoly, n: int) -> PeriodicPiecewisePoly:
    for _ in range(n):
        p = ppoly.derivative(p)
    return p


def check_hypothesis(
    x: PeriodicPiecewisePoly, Psi: PeriodicPiecewisePoly, orders
) -> dict[int, tuple[float, float]]:
    """Verify ``||x^(k)|| <= ||Psi^(k)||`` for each order; raise if any fails."""
    norms = {}
    for k in orders:
        nx = ppoly.sup_norm(_nth_derivative(x, k))
        nP = ppoly.sup_norm(_nth_derivative(Psi, k))
        norms[k] = (nx, nP)
        if nx > nP * (1 + HYPOTHESIS_REL):
            raise HypothesisNotMet(f"||x^({k})|| = {nx!r} exceeds ||Psi^({k})|| = {nP!r}")
    return norms


@dataclass(frozen=True)
class ComparisonResult:
    ok: bool
    worst_violation: float
    tolerance: float


def comparison_check(
    x: PeriodicPiecewisePoly,
    Psi: PeriodicPiecewisePoly,
    r: int,
    k_list=None,
    cfg: MeasurementConfig | None = None,
) -> ComparisonResult:
    """Check ``|x'(tau)| <= |Psi'(xi)|`` whenever ``x(tau) = Psi(xi)`` on a grid of ``tau``.

    ``k_list`` are the orders of the norm hypothesis (default ``0, r-2, r``).
    ``ok`` is False only for a genuine counterexample beyond
    ``1e-8 * (1 + ||Psi'||)``.

    Raises:
        HypothesisNotMet: if some ``||x^(k)|| > ||Psi^(k)||``.
    """
    cfg = cfg or MeasurementConfig()
    orders = (0, r - 2, r) if k_list is None else tuple(k_list)
    check_hypothesis(x, Psi, orders)
    S = ppoly.sup_norm(Psi)
    dPsi_norm = ppoly.sup_norm(ppoly.derivative(Psi))
    tol = 1e-8 * (1.0 + dPsi_norm)
    tau = x.period * np.arange(cfg.grid_points) / cfg.grid_points
    levels = np.clip(ppoly.evaluate(x, tau), -S, S)
    lhs = np.abs(ppoly.evaluate(ppoly.derivative(x), tau))
    rhs = level_speed(Psi, levels)
    worst = float(np.max(lhs - rhs))
    return ComparisonResult(worst <= tol, worst, tol)


@dataclass(frozen=True)
class BoundResult:
    ok: bool
    lhs: float
    rhs: float


def k2_bound_check(
    x: PeriodicPiecewisePoly, Psi: PeriodicPiecewisePoly, k2: int, r: int
) -> BoundResult:
    """Check ``||x^(k2)|| <= ||Psi^(k2)||`` under the norm hypothesis at orders ``0, r-2, r``."""
    check_hypothesis(x, Psi, (0, r - 2, r))
    lhs = ppoly.sup_norm(_nth_derivative(x, k2))
    rhs = ppoly.sup_norm(_nth_derivative(Psi, k2))
    return BoundResult(lhs <= rhs * (1 + HYPOTHESIS_REL), lhs, rhs)


def comparison_report(x, Psi, r, cfg: MeasurementConfig | None = None) -> dict:
    """JSON-ready report: ``hypothesis_met``, ``ok``, ``worst_violation``, ``config``."""
    cfg = cfg or MeasurementConfig()
    try:
        res = comparison_check(x, Psi, r, cfg=cfg)
    except HypothesisNotMet:
        return {"hypothesis_met": False, "ok": False, "worst_violation": None, "config": cfg.to_dict()}
    return {
        "hypothesis_met": True,
        "ok": res.ok,
        "worst_violation": res.worst_violation,
        "config": cfg.to_dict(),
    }


_SINUSOID_PIECES = 8


def _hermite_piece(left: np.ndarray, right: np.ndarray, width: float) -> np.ndarray:
    """Monomial coefficients (local variable) of the two-point Hermite interpolant.

    ``left[i]`` and ``right[i]`` are the i-th derivatives at the two ends,
    ``i = 0..m``; the result has degree ``2m + 1``.
    """
    m = left.size - 1
    n = 2 * m + 2
    # unknowns are coefficients in s = u / width; rows impose d^i/ds^i at s = 0 and s = 1
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    powers = np.arange(n)
    for i in range(m + 1):
        falling = np.array([math.perm(j, i) for j in powers], dtype=float)
        A[i, i] = math.factorial(i)
        A[m + 1 + i] = falling
        rhs[i] = left[i] * width**i
        rhs[m + 1 + i] = right[i] * width**i
    c = np.linalg.solve(A, rhs)
    return c / width**powers


def sinusoid(amplitude: float, omega: float, degree: int = 11) -> PeriodicPiecewisePoly:
    """``A sin(omega t)`` as a C^m piecewise polynomial of odd degree ``2m + 1``.

    Eight pieces per period, each the two-point Hermite interpolant matching
    derivatives ``0..m`` at both ends, so consecutive pieces join with
    smoothness m by construction. On a phase interval of length ``pi/4`` the
    error is at most ``|A| (pi/8)**(2m+2) / (2m+2)!``, below ``4e-14 |A|``
    for the default degree 11.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if degree < 1 or degree % 2 == 0:
        raise ValueError("degree must be odd and positive")
    m = (degree - 1) // 2
    H = 2.0 * math.pi / _SINUSOID_PIECES
    orders = np.arange(m + 1)

    def derivs(theta):
        return np.sin(theta + 0.5 * math.pi * orders)

    rows = []
    for q in range(_SINUSOID_PIECES):
        c = _hermite_piece(derivs(q * H), derivs((q + 1) * H), H)
        rows.append(amplitude * c * omega ** np.arange(degree + 1))
    bp = H * np.arange(_SINUSOID_PIECES + 1) / omega
    return PeriodicPiecewisePoly(bp, np.array(rows), m)


def sinusoid_interpolation_bound(amplitude: float, degree: int = 11) -> float:
    n = degree + 1
    return abs(amplitude) * (math.pi / _SINUSOID_PIECES) ** n / math.factorial(n)


def random_sinusoid(Psi: PeriodicPiecewisePoly, r: int, rng: np.random.Generator, spread: float = 1.5):
    """A sinusoid satisfying the norm hypothesis against ``Psi`` with a little slack.

    The frequency is drawn log-uniformly around the value that balances the
    order r-2 and order r constraints; the amplitude is then a random fraction
    in ``[0.5, 0.999]`` of the largest admissible one. Returns ``(x, A, omega)``.
    """
    n0 = ppoly.sup_norm(Psi)
    nr2 = ppoly.sup_norm(_nth_derivative(Psi, r - 2))
    nr = ppoly.sup_norm(_nth_derivative(Psi, r))
    omega_star = math.sqrt(nr / nr2)
    omega = omega_star * math.exp(rng.uniform(-spread, spread))
    a_max = min(n0, nr2 / omega ** (r - 2), nr / omega**r)
    A = a_max * rng.uniform(0.5, 0.999)
    return sinusoid(A, omega), A, omega
