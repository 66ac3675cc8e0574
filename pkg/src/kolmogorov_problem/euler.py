"""Euler perfect splines and Favard constants.

``phi_r`` is the r-th zero-mean periodic antiderivative of ``sgn sin t`` and
``K_r = ||phi_r||`` its sup-norm,

    K_r = 4/pi * sum_{nu >= 0} (-1)**(nu*(r+1)) / (2*nu + 1)**(r+1).

The series is summed by pairing consecutive terms,
``h(m) = (4m+1)**-s +/- (4m+3)**-s`` with ``s = r + 1``, which is completely
monotone in ``m``; a short partial sum plus an Euler-Maclaurin tail then
gives full double precision with a rigorous remainder bound even for the
conditionally convergent case ``r = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadOrderPair, OrderOutOfRange

R_MAX = 16

_N_PARTIAL = 50
# B_2, B_4, B_6, B_8, B_10
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66)
_EM_TERMS = 4


def _rising(s: int, k: int) -> float:
    return math.prod(range(s, s + k))


def _paired_derivative(s: int, sigma: int, k: int, x: float) -> float:
    # k-th derivative of (4x+1)^-s + sigma*(4x+3)^-s
    c = (-1) ** k * _rising(s, k) * 4.0**k
    return c * ((4 * x + 1) ** (-s - k) + sigma * (4 * x + 3) ** (-s - k))


def _paired_tail_integral(s: int, sigma: int, n: int) -> float:
    if s == 1:
        # only the alternating case reaches s == 1
        return 0.25 * math.log1p(2.0 / (4 * n + 1))
    return ((4 * n + 1) ** (1 - s) + sigma * (4 * n + 3) ** (1 - s)) / (4.0 * (s - 1))


def favard_series(r: int) -> tuple[float, float]:
    """Return ``(K_r, remainder_bound)`` computed from the defining series."""
    if not 0 <= r <= R_MAX:
        raise OrderOutOfRange(f"Favard constant order must be in [0, {R_MAX}], got {r}")
    s = r + 1
    sigma = -1 if r % 2 == 0 else 1
    head = math.fsum(
        (4 * m + 1) ** -float(s) + sigma * (4 * m + 3) ** -float(s) for m in range(_N_PARTIAL)
    )
    n = _N_PARTIAL
    tail = _paired_tail_integral(s, sigma, n) + 0.5 * _paired_derivative(s, sigma, 0, n)
    for j in range(1, _EM_TERMS + 1):
        b2j = _BERNOULLI[j - 1]
        tail -= b2j / math.factorial(2 * j) * _paired_derivative(s, sigma, 2 * j - 1, n)
    b_next = _BERNOULLI[_EM_TERMS]
    p = _EM_TERMS + 1
    remainder = 2.0 * abs(b_next / math.factorial(2 * p) * _paired_derivative(s, sigma, 2 * p - 1, n))
    scale = 4.0 / math.pi
    return scale * (head + tail), scale * remainder


@lru_cache(maxsize=None)
def favard(r: int) -> float:
    """Favard constant ``K_r = ||phi_r||`` for ``0 <= r <= 16``."""
    value, _ = favard_series(r)
    return value


def favard_table(max_r: int = R_MAX) -> dict[int, float]:
    return {r: favard(r) for r in range(max_r + 1)}


def euler_spline(r: int, t, terms: int = 100_000) -> tuple[np.ndarray, float]:
    """Fourier partial sum of ``phi_r`` at ``t`` together with a bound on the truncation error.

    ``phi_r(t) = 4/pi * sum sin((2nu+1) t - r pi/2) / (2nu+1)**(r+1)``; the
    neglected tail is bounded by ``4/pi * sum_{nu >= terms} (2nu+1)**-(r+1)``.
    """
    if r < 1:
        raise OrderOutOfRange("the Fourier series of phi_0 is not absolutely convergent")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    chunk = 4096
    for start in range(0, terms, chunk):
        n = 2 * np.arange(start, min(start + chunk, terms)) + 1.0
        phase = np.outer(t, n) - r * math.pi / 2
        out += np.sin(phase) @ (n ** -(r + 1.0))
    out *= 4.0 / math.pi
    n0 = 2 * terms + 1
    bound = 4.0 / math.pi * (n0 ** -(r + 1.0) + n0 ** (-float(r)) / (2.0 * r))
    return out, bound


def kolmogorov_bound(M0: float, Mr: float, k: int, r: int) -> float:
    """Largest admissible ``M_k`` given ``||x|| = M0`` and ``||x^(r)|| = Mr``."""
    if not (0 < k < r <= R_MAX):
        raise BadOrderPair(f"need 0 < k < r <= {R_MAX}, got k={k}, r={r}")
    if not (M0 > 0 and Mr > 0):
        raise ValueError("M0 and Mr must be positive")
    q = k / r
    return favard(r - k) / favard(r) ** (1 - q) * M0 ** (1 - q) * Mr**q


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    margin: float
    bound: float | None = None
    relative_margin: float | None = None
    diagnostic_only: bool = False

    def to_dict(self) -> dict:
        d = {"holds": self.holds, "margin": self.margin}
        if self.bound is not None:
            d["bound"] = self.bound
        if self.relative_margin is not None:
            d["relative_margin"] = self.relative_margin
        if self.diagnostic_only:
            d["diagnostic_only"] = True
        return d


def feasibility_slack(bound: float) -> float:
    """Tolerance below zero still accepted as a non-strict inequality."""
    return 1e-10 * (1.0 + abs(bound))


def rm2_bound(Mk: float, Mr: float, k: int, r: int) -> float:
    """Right-hand side of the (k, r-2, r) Kolmogorov inequality for ``M_{r-2}``."""
    if not (r >= 4 and 0 < k < r - 2 and r <= R_MAX):
        raise BadOrderPair(f"need r >= 4 and 0 < k < r - 2 (r <= {R_MAX}), got k={k}, r={r}")
    if not (Mk > 0 and Mr > 0):
        raise ValueError("Mk and Mr must be positive")
    d = r - k
    return favard(2) / favard(d) ** (2 / d) * Mk ** (2 / d) * Mr ** ((d - 2) / d)


def condition_a(Mk: float, Mrm2: float, Mr: float, k: int, r: int) -> ConditionResult:
    """Check ``M_{r-2} <= K_2 / K_{r-k}^(2/(r-k)) * M_k^(2/(r-k)) * M_r^((r-k-2)/(r-k))``.

    ``margin = bound - Mrm2``, signed and in units of ``M_{r-2}``.
    """
    bound = rm2_bound(Mk, Mr, k, r)
    if not Mrm2 > 0:
        raise ValueError("Mrm2 must be positive")
    margin = bound - Mrm2
    return ConditionResult(
        holds=margin >= -feasibility_slack(bound),
        margin=margin,
        bound=bound,
        relative_margin=margin / bound,
    )
