"""Numerics for the (0, k, r-2, r) Kolmogorov problem on the real line.

Modules: ``ppoly`` (periodic piecewise polynomials), ``psi`` (the plateau
spline family), ``euler`` (Favard constants and Kolmogorov inequalities),
``solver`` (feasibility and extremal functions), ``verify`` (numerical
checks of the comparison property) and ``cli``.
"""
from .errors import KolmogorovError
from .ppoly import PeriodicPiecewisePoly
from .psi import PsiSpline, build_psi, psi_norm
from .solver import FeasibilityReport, ProblemInstance, decide, solve_parameters

__all__ = [
    "KolmogorovError",
    "PeriodicPiecewisePoly",
    "PsiSpline",
    "build_psi",
    "psi_norm",
    "FeasibilityReport",
    "ProblemInstance",
    "decide",
    "solve_parameters",
]

__version__ = "0.1.0"
