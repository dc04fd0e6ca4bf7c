"""Exception hierarchy shared by the burnstab modules."""


class BurnstabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(BurnstabError, ValueError):
    """Structural constants violate positivity / nonzero-theta requirements."""


class HypothesisError(BurnstabError, ValueError):
    """Arguments do not satisfy the hypotheses of a root-pattern predicate."""


class NotSaddleRegime(BurnstabError):
    """The equilibrium Jacobian lacks the (one positive real, two stable) spectrum."""


class DegenerateSpectrum(BurnstabError):
    """Two eigenvalues coincide, so the Schur ordering is ill-defined."""


class IntegrationFailure(BurnstabError):
    """Integration stopped early.  ``trajectory`` keeps the partial result."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepSizeUnderflow(IntegrationFailure):
    """Adaptive step-size control shrank the step below the usable minimum."""


class NonFiniteState(IntegrationFailure):
    """Integration produced inf/nan."""


class GridTooLarge(BurnstabError, ValueError):
    pass


class NoRootInInterval(BurnstabError):
    pass


class BranchConditionUnmet(BurnstabError):
    """A constructive parameter family missed its discriminant sign condition."""

    def __init__(self, message, discriminant=None, params=None):
        super().__init__(message)
        self.discriminant = discriminant
        self.params = params
