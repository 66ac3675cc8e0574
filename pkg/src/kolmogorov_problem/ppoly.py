"""Periodic piecewise polynomials.

A :class:`PeriodicPiecewisePoly` stores one polynomial per interval
``[t_j, t_{j+1}]`` of a period ``[0, T)``, in the *local* variable
``u = t - t_j`` (ascending powers). Everything the rest of the package needs,
namely evaluation, differentiation, zero-mean periodic integration, sup-norms,
amplitude/time scaling and translation, is implemented here as pure functions
returning new objects.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import NonPositiveScale, NonZeroMeanInput

__all__ = [
    "PeriodicPiecewisePoly",
    "TAU_ROOT",
    "add_constant",
    "antiderivative_zero_mean",
    "argmax_abs",
    "constant",
    "derivative",
    "evaluate",
    "extreme_points",
    "from_json",
    "mean",
    "scale",
    "shift",
    "stitch_defect",
    "stitch_tolerance",
    "sup_norm",
    "to_json",
]

TAU_ROOT = 1e-12
_STITCH_REL = 1e-10
_MEAN_REL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _horner(coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise Horner: ``coeffs`` is (n, D+1) aligned with ``u`` of shape (n,)."""
    out = np.array(coeffs[:, -1], dtype=float)
    for i in range(coeffs.shape[1] - 2, -1, -1):
        out = out * u + coeffs[:, i]
    return out


@dataclass(frozen=True, eq=False)
class PeriodicPiecewisePoly:
    """Periodic function given by polynomial pieces in local coordinates.

    Attributes:
        breakpoints: ``t_0 = 0 < t_1 < ... < t_m = period``.
        coeffs: array of shape ``(m, D + 1)``; row ``j`` holds ``c_0..c_D`` of
            ``p_j(u) = sum c_i u**i`` with ``u = t - t_j``.
        smoothness: asserted continuity class across breakpoints and the wrap,
            checked at construction against :func:`stitch_tolerance`.
        ae_derivative: True for functions allowed to jump at breakpoints, such as
            the almost-everywhere derivative of a C^0 function. Breakpoint values
            are then one-sided (right-continuous) and ``smoothness`` is not checked.

    Raises:
        ValueError: on malformed breakpoints/coefficients or when the pieces do
            not join with the declared smoothness.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray
    smoothness: int = 0
    ae_derivative: bool = False

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if c.shape[0] != bp.size - 1:
            raise ValueError(f"{bp.size - 1} intervals but {c.shape[0]} pieces")
        if bp[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        widths = np.diff(bp)
        if np.any(widths < 0):
            raise ValueError("breakpoints must be non-decreasing")
        keep = widths > 0
        if not np.any(keep):
            raise ValueError("period must be positive")
        if not np.all(keep):
            bp = np.concatenate([[0.0], bp[1:][keep]])
            c = c[keep]
        if self.smoothness < 0:
            raise ValueError("smoothness must be >= 0")
        object.__setattr__(self, "breakpoints", _frozen(bp))
        object.__setattr__(self, "coeffs", _frozen(c))
        if not self.ae_derivative:
            defect = stitch_defect(self)
            if defect > stitch_tolerance(self):
                raise ValueError(
                    f"pieces do not join with smoothness {self.smoothness}: jump {defect!r}"
                )

    @classmethod
    def from_pieces(
        cls,
        breakpoints: Sequence[float],
        pieces: Sequence[Sequence[float]],
        smoothness: int = 0,
    ) -> PeriodicPiecewisePoly:
        """Build from ragged coefficient lists; shorter lists are zero-padded."""
        width = max(len(p) for p in pieces)
        c = np.zeros((len(pieces), width))
        for j, p in enumerate(pieces):
            c[j, : len(p)] = p
        return cls(np.asarray(breakpoints, dtype=float), c, smoothness)

    @property
    def period(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_pieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def pieces(self) -> list[list[float]]:
        return self.coeffs.tolist()

    def __call__(self, t):
        return evaluate(self, t)

    @cached_property
    def _extrema(self) -> tuple[np.ndarray, np.ndarray]:
        return _candidate_extrema(self)


def constant(c: float, period: float, smoothness: int = 16) -> PeriodicPiecewisePoly:
    return PeriodicPiecewisePoly(np.array([0.0, period]), np.array([[float(c)]]), smoothness)


def evaluate(p: PeriodicPiecewisePoly, t):
    """Evaluate ``p`` at ``t`` (scalar or array), reducing ``t`` modulo the period."""
    scalar = np.ndim(t) == 0
    tt = np.mod(np.asarray(t, dtype=float), p.period)
    j = np.searchsorted(p.breakpoints, tt, side="right") - 1
    j = np.clip(j, 0, p.n_pieces - 1)
    u = tt - p.breakpoints[j]
    out = _horner(p.coeffs[j.ravel()], u.ravel()).reshape(np.shape(tt))
    return float(out) if scalar else out


def derivative(p: PeriodicPiecewisePoly) -> PeriodicPiecewisePoly:
    """Piecewise formal derivative.

    For ``smoothness == 0`` the result is the a.e. derivative and carries
    ``ae_derivative=True``.
    """
    if p.degree == 0:
        dc = np.zeros((p.n_pieces, 1))
    else:
        dc = p.coeffs[:, 1:] * np.arange(1, p.degree + 1)
    return PeriodicPiecewisePoly(
        p.breakpoints,
        dc,
        max(p.smoothness - 1, 0),
        ae_derivative=p.ae_derivative or p.smoothness == 0,
    )


def _piece_integrals_raw(coeffs: np.ndarray, widths: np.ndarray) -> np.ndarray:
    powers = np.arange(1, coeffs.shape[1] + 1)
    return np.sum(coeffs * widths[:, None] ** powers / powers, axis=1)


def _piece_integrals(p: PeriodicPiecewisePoly) -> np.ndarray:
    return _piece_integrals_raw(p.coeffs, p.widths)


def mean(p: PeriodicPiecewisePoly) -> float:
    """Exact mean over one period by closed-form monomial integration."""
    return math.fsum(_piece_integrals(p)) / p.period


def _coeff_bound(p: PeriodicPiecewisePoly) -> float:
    # Cheap upper bound for sup|p| (sum of |c_i| h^i per piece).
    h = p.widths[:, None]
    return float(np.max(np.sum(np.abs(p.coeffs) * h ** np.arange(p.degree + 1), axis=1)))


def antiderivative_zero_mean(p: PeriodicPiecewisePoly) -> PeriodicPiecewisePoly:
    """The unique periodic antiderivative of ``p`` with zero mean.

    Raises:
        NonZeroMeanInput: if ``|mean(p)|`` exceeds ``1e-12 * period * (1 + sup|p|)``;
            such a ``p`` has no periodic antiderivative.
    """
    m = mean(p)
    if abs(m) > _MEAN_REL * p.period * (1.0 + _coeff_bound(p)):
        raise NonZeroMeanInput(f"mean {m!r} is not zero; antiderivative would not be periodic")
    c = p.coeffs.copy()
    c[:, 0] -= m  # project out rounding residue so the result closes up exactly
    powers = np.arange(1, p.degree + 2)
    q = np.zeros((p.n_pieces, p.degree + 2))
    q[:, 1:] = c / powers
    h = p.widths
    increments = np.sum(q[:, 1:] * h[:, None] ** powers, axis=1)
    q[1:, 0] = np.cumsum(increments)[:-1]
    q[:, 0] -= math.fsum(_piece_integrals_raw(q, h)) / p.period
    return PeriodicPiecewisePoly(p.breakpoints, q, 0 if p.ae_derivative else p.smoothness + 1)


def scale(p: PeriodicPiecewisePoly, b: float, lam: float) -> PeriodicPiecewisePoly:
    """``t -> b * p(lam * t)``; the period becomes ``period / lam``."""
    if not lam > 0:
        raise NonPositiveScale(f"time scale must be positive, got {lam!r}")
    c = p.coeffs * (b * lam ** np.arange(p.degree + 1))
    return PeriodicPiecewisePoly(p.breakpoints / lam, c, p.smoothness, p.ae_derivative)


def add_constant(p: PeriodicPiecewisePoly, c: float) -> PeriodicPiecewisePoly:
    q = p.coeffs.copy()
    q[:, 0] += c
    return PeriodicPiecewisePoly(p.breakpoints, q, p.smoothness, p.ae_derivative)


def _taylor_shift(c: np.ndarray, u0: float) -> np.ndarray:
    """Coefficients of ``v -> p(u0 + v)`` given those of ``p``."""
    d = np.array(c, dtype=float)
    n = d.size
    for k in range(n - 1):
        for i in range(n - 2, k - 1, -1):
            d[i] += u0 * d[i + 1]
    return d


def shift(p: PeriodicPiecewisePoly, s: float) -> PeriodicPiecewisePoly:
    """Time translation ``t -> p(t + s)``."""
    T = p.period
    s = math.fmod(s, T)
    if s < 0:
        s += T
    if s == 0.0 or s == T:
        return p
    j = int(np.clip(np.searchsorted(p.breakpoints, s, side="right") - 1, 0, p.n_pieces - 1))
    u0 = s - p.breakpoints[j]
    h = p.widths
    order = list(range(j + 1, p.n_pieces)) + list(range(0, j))
    rows = [_taylor_shift(p.coeffs[j], u0)]
    lengths = [h[j] - u0]
    rows += [p.coeffs[i] for i in order]
    lengths += [h[i] for i in order]
    if u0 > 0:
        rows.append(p.coeffs[j])
        lengths.append(u0)
    bp = np.concatenate([[0.0], np.cumsum(lengths)])
    bp[-1] = T
    return PeriodicPiecewisePoly(bp, np.array(rows), p.smoothness, p.ae_derivative)


def _critical_points(p: PeriodicPiecewisePoly) -> tuple[np.ndarray, np.ndarray, list]:
    """Roots of each ``p_j'`` strictly inside its piece, plus the bracketing grids.

    Degree <= 2 pieces are solved in closed form; higher degrees are bracketed on
    a Chebyshev-density grid of ``8 * degree`` points and refined by bisection to
    ``TAU_ROOT`` in the abscissa.
    """
    h = p.widths
    deriv = p.coeffs[:, 1:] * np.arange(1, p.degree + 1) if p.degree > 0 else None
    piece_idx: list[int] = []
    roots: list[float] = []
    grids = []
    br_piece, br_lo, br_hi = [], [], []
    for j in range(p.n_pieces):
        if deriv is None:
            break
        d = deriv[j]
        nz = np.nonzero(d)[0]
        if nz.size == 0:
            continue
        deg_d = int(nz[-1])
        if deg_d == 0:
            continue
        if deg_d == 1:
            # root -d0/d1 lies inside iff the signs differ and |d0| < |d1| h
            if d[0] * d[1] < 0 and abs(d[0]) < abs(d[1]) * h[j]:
                piece_idx.append(j)
                roots.append(-d[0] / d[1])
            continue
        n = 8 * (deg_d + 1)
        nodes = 0.5 * h[j] * (1.0 - np.cos(np.pi * np.arange(n) / (n - 1)))
        vals = _horner(np.broadcast_to(d, (n, d.size)), nodes)
        grids.append((j, nodes))
        sgn = np.sign(vals)
        for i in np.nonzero(sgn == 0)[0]:
            if 0 < i < n - 1:
                piece_idx.append(j)
                roots.append(nodes[i])
        for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            br_piece.append(j)
            br_lo.append(nodes[i])
            br_hi.append(nodes[i + 1])
    if br_piece:
        bj = np.array(br_piece)
        lo = np.array(br_lo)
        hi = np.array(br_hi)
        dc = deriv[bj]
        f_lo = _horner(dc, lo)
        iters = int(np.ceil(np.log2(max(np.max(hi - lo), TAU_ROOT) / TAU_ROOT))) + 1
        for _ in range(min(iters, 200)):
            mid = 0.5 * (lo + hi)
            f_mid = _horner(dc, mid)
            same = np.sign(f_mid) == np.sign(f_lo)
            lo = np.where(same, mid, lo)
            f_lo = np.where(same, f_mid, f_lo)
            hi = np.where(same, hi, mid)
        piece_idx.extend(br_piece)
        roots.extend((0.5 * (lo + hi)).tolist())
    return np.array(piece_idx, dtype=int), np.array(roots, dtype=float), grids


def _candidate_extrema(p: PeriodicPiecewisePoly) -> tuple[np.ndarray, np.ndarray]:
    """Abscissae and values of every candidate for a max/min of ``p``."""
    m = p.n_pieces
    h = p.widths
    js = [np.arange(m), np.arange(m)]
    us = [np.zeros(m), h]
    cj, cu, grids = _critical_points(p)
    js.append(cj)
    us.append(cu)
    for j, nodes in grids:
        js.append(np.full(nodes.size, j))
        us.append(nodes)
    j = np.concatenate(js)
    u = np.concatenate(us)
    vals = _horner(p.coeffs[j], u)
    return p.breakpoints[j] + u, vals


def sup_norm(p: PeriodicPiecewisePoly) -> float:
    """``max |p|`` over a period from endpoint values and interior critical points."""
    _, vals = p._extrema
    return float(np.max(np.abs(vals)))


def argmax_abs(p: PeriodicPiecewisePoly) -> tuple[float, float]:
    """Abscissa and (signed) value where ``|p|`` attains its maximum."""
    t, vals = p._extrema
    i = int(np.argmax(np.abs(vals)))
    return float(t[i]), float(vals[i])


def extreme_points(p: PeriodicPiecewisePoly) -> tuple[float, float, float, float]:
    """``(t_min, min, t_max, max)`` of ``p`` over one period."""
    t, vals = p._extrema
    i, k = int(np.argmin(vals)), int(np.argmax(vals))
    return float(t[i]), float(vals[i]), float(t[k]), float(vals[k])


def stitch_tolerance(p: PeriodicPiecewisePoly) -> float:
    return _STITCH_REL * (1.0 + float(np.max(np.abs(p.coeffs))))


def stitch_defect(p: PeriodicPiecewisePoly) -> float:
    """Largest jump of derivatives ``0..smoothness`` across breakpoints and the wrap."""
    worst = 0.0
    h = p.widths
    c = p.coeffs
    for _ in range(min(p.smoothness, p.degree) + 1):
        left = _horner(c, h)
        right = np.roll(c[:, 0], -1)
        worst = max(worst, float(np.max(np.abs(left - right))))
        if c.shape[1] == 1:
            break
        c = c[:, 1:] * np.arange(1, c.shape[1])
    return worst


def to_dict(p: PeriodicPiecewisePoly) -> dict:
    d = {
        "period": p.period,
        "breakpoints": p.breakpoints.tolist(),
        "pieces": p.coeffs.tolist(),
        "smoothness": int(p.smoothness),
    }
    if p.ae_derivative:
        d["ae_derivative"] = True
    return d


def from_dict(d: dict) -> PeriodicPiecewisePoly:
    bp = np.asarray(d["breakpoints"], dtype=float)
    if bp[-1] != float(d["period"]):
        raise ValueError("last breakpoint must equal the period")
    return PeriodicPiecewisePoly(
        bp,
        np.asarray(d["pieces"], dtype=float),
        int(d["smoothness"]),
        ae_derivative=bool(d.get("ae_derivative", False)),
    )


def to_json(p: PeriodicPiecewisePoly) -> str:
    return json.dumps(to_dict(p))


def from_json(s: str) -> PeriodicPiecewisePoly:
    return from_dict(json.loads(s))
