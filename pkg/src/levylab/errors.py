"""Exception types shared across the package."""


class LevylabError(Exception):
    """Base class for all package errors."""


class InvalidArgument(LevylabError):
    """An argument violates a documented precondition."""


class QuadratureFailure(LevylabError):
    """Numerical quadrature did not reach the requested tolerance."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConsistencyFailure(LevylabError):
    """Two independent computations of the same quantity disagree."""

    def __init__(self, message, discrepancy=None):
        super().__init__(message)
        self.discrepancy = discrepancy


class PreconditionFailure(LevylabError):
    """A mathematical precondition (e.g. nondegeneracy) is not met."""


class ResolutionTooCoarse(LevylabError):
    """The grid cannot represent the requested object to tolerance."""

    def __init__(self, message, suggested_points=None, suggested_length=None):
        super().__init__(message)
        self.suggested_points = suggested_points
        self.suggested_length = suggested_length


class IterationFailure(LevylabError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class UnsupportedMeasure(LevylabError):
    """The operation does not support this Levy measure family."""


class DriftEvaluationFailure(LevylabError):
    """A drift callback returned a non-finite value."""

    def __init__(self, message, t=None, x=None):
        super().__init__(message)
        self.t = t
        self.x = x


class GradientAugmentationInconsistency(LevylabError):
    """The gradient components of an augmented system drifted away from
    the spectral gradient of the scalar component."""


class DomainExitWarning(UserWarning):
    """Too many Monte Carlo paths left the safe region of the torus."""
