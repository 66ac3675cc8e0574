"""The plateau spline family ``psi_r(a; t)``.

``psi_1(a; .)`` is the even, ``(4 + 2a)``-periodic function equal to
``t - 1`` on ``[0, 1]``, ``0`` on ``[1, a + 1]`` and ``t - a - 1`` on
``[a + 1, a + 2]``. Higher orders are zero-mean periodic antiderivatives, so
``psi_r' = psi_{r-1}``. At ``a = 0`` the family reduces to rescaled Euler
perfect splines, ``psi_r(0; t) = (pi/2)**-r * phi_r(pi t / 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ppoly
from .errors import NegativePlateau, OrderOutOfRange, OrderTooLow
from .ppoly import PeriodicPiecewisePoly

R_MAX = 16


def build_psi1(a: float) -> PeriodicPiecewisePoly:
    """``psi_1(a; .)`` laid out explicitly on ``[0, 4 + 2a)`` (mirror half included)."""
    if not a >= 0:
        raise NegativePlateau(f"plateau length must be >= 0, got {a!r}")
    a = float(a)
    bp = [0.0, 1.0, a + 1, a + 2, a + 3, 2 * a + 3, 2 * a + 4]
    pieces = [
        [-1.0, 1.0],  # t - 1
        [0.0, 0.0],
        [0.0, 1.0],  # t - a - 1
        [1.0, -1.0],  # mirror of the previous piece
        [0.0, 0.0],
        [0.0, -1.0],  # mirror of t - 1
    ]
    return PeriodicPiecewisePoly.from_pieces(bp, pieces, smoothness=0)


@dataclass(frozen=True, eq=False)
class PsiSpline:
    """``psi_r(a; .)`` with lazily cached derivative norms.

    ``norm(s)`` is ``||psi_{r-s}(a; .)||``, the sup-norm of the s-th derivative.
    """

    a: float
    r: int
    f: PeriodicPiecewisePoly
    _norms: dict = field(default_factory=dict, repr=False)

    @property
    def period(self) -> float:
        return 4.0 + 2.0 * self.a

    def derivative(self, s: int = 1) -> PeriodicPiecewisePoly:
        g = self.f
        for _ in range(s):
            g = ppoly.derivative(g)
        return g

    def norm(self, s: int = 0) -> float:
        if not 0 <= s <= self.r:
            raise ValueError(f"derivative order must be in [0, {self.r}]")
        if s not in self._norms:
            self._norms[s] = ppoly.sup_norm(self.derivative(s))
        return self._norms[s]

    def __call__(self, t):
        return ppoly.evaluate(self.f, t)

    def to_dict(self) -> dict:
        return {"a": self.a, "r": self.r, "f": ppoly.to_dict(self.f)}


def build_psi(a: float, r: int) -> PsiSpline:
    """Build ``psi_r(a; .)`` by ``r - 1`` zero-mean periodic integrations of ``psi_1``."""
    if not 1 <= r <= R_MAX:
        raise OrderOutOfRange(f"order must be in [1, {R_MAX}], got {r}")
    f = build_psi1(a)
    for _ in range(r - 1):
        f = ppoly.antiderivative_zero_mean(f)
    return PsiSpline(float(a), int(r), f)


def psi_norm(a: float, s: int) -> float:
    """``N_s(a) = ||psi_s(a; .)||``."""
    if s < 1:
        raise OrderTooLow("psi is defined for orders >= 1")
    return ppoly.sup_norm(build_psi(a, s).f)


def zeros(a: float, r: int) -> tuple[float, float]:
    """The two zeros per period: ``{0, a + 2}`` for even r, ``{1 + a/2, 3 + 3a/2}`` for odd r."""
    if r < 2:
        raise OrderTooLow("psi_1 has a plateau of zeros; landmarks need r >= 2")
    if r % 2 == 0:
        return 0.0, a + 2.0
    return 1.0 + a / 2.0, 3.0 + 1.5 * a


def landmarks(psi: PsiSpline) -> dict:
    """Zeros and extrema of ``psi_r`` on one period.

    Extrema of ``psi_r`` sit at the zeros of ``psi_{r-1}``; for ``r = 2`` those
    are the midpoints of the plateaus of the minimum and the maximum.
    """
    if psi.r < 2:
        raise OrderTooLow("landmarks need r >= 2")
    z = zeros(psi.a, psi.r)
    if psi.r - 1 >= 2:
        ext_t = zeros(psi.a, psi.r - 1)
    else:
        ext_t = (1.0 + psi.a / 2.0, 3.0 + 1.5 * psi.a)
    ext = [(t, float(psi(t))) for t in ext_t]
    return {"zeros": list(z), "extrema": ext}


def sign_changes(psi: PsiSpline, n: int = 20_000) -> int:
    """Count sign changes of ``psi_r`` over one period on a uniform grid (cyclic)."""
    t = (np.arange(n) + 0.5) * psi.period / n
    s = np.sign(psi(t))
    s = s[s != 0]
    return int(np.count_nonzero(s != np.roll(s, 1)))
