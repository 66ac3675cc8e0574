"""Exception hierarchy shared by all modules."""


class KolmogorovError(ValueError):
    """Base class for domain errors raised by this package."""


class NonZeroMeanInput(KolmogorovError):
    """The periodic antiderivative was requested for a function with nonzero mean."""


class NonPositiveScale(KolmogorovError):
    pass


class NegativePlateau(KolmogorovError):
    pass


class OrderTooLow(KolmogorovError):
    pass


class OrderOutOfRange(KolmogorovError):
    pass


class BadOrderPair(KolmogorovError):
    pass


class InvalidInstance(KolmogorovError):
    """Problem instance violates the order or positivity constraints."""


class InfeasibleTriple(KolmogorovError):
    """(M_k, M_{r-2}, M_r) violates the three-number Kolmogorov inequality."""


class NotFeasible(KolmogorovError):
    pass


class ConvergenceError(KolmogorovError):
    """Bisection did not converge or observed a non-monotone objective."""


class StepTooLarge(KolmogorovError):
    pass


class LevelOutOfRange(KolmogorovError):
    pass


class HypothesisNotMet(KolmogorovError):
    """The norm hypotheses of the comparison theorem fail for the given pair."""
