"""Exception and warning types shared across the package."""


class PHSError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PHSError, ValueError):
    """A coordinate lies outside the domain of a coefficient or map."""


class SignError(PHSError, ValueError):
    """A sign-declared coefficient evaluated to zero or the wrong sign."""


class QuadratureError(PHSError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes:
        estimate: best available value of the integral.
        error: achieved absolute error estimate.
    """

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class OutOfRangeError(PHSError, ValueError):
    """A value is outside the range of p_w, so p_w^{-1} is undefined there."""


class ConvergenceError(PHSError):
    """An iterative solver failed to converge."""


class ExtrapolationError(PHSError, ValueError):
    """A state was asked for values outside its grid without a zero tail."""


class ValidationError(PHSError, ValueError):
    """Structural validation of an input failed (shapes, ranks, flags)."""


class ClassificationError(PHSError):
    """A boundary matrix is singular where invertibility is required."""


class InertiaError(PHSError):
    """The inertia of P1 H is not constant or P1 H is singular."""


class RefinementError(PHSError):
    """Eigenvector continuity is lost between neighbouring grid nodes."""


class NotAGeneratorError(PHSError):
    """The operator does not generate a C0-semigroup.

    Attributes:
        report: the GenerationReport that led to the verdict.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(PHSError, ValueError):
    """A configuration file is malformed."""


class TailTruncationWarning(UserWarning):
    """An integral over [xi, inf) was truncated at the grid end with non-negligible mass."""


class HeuristicWarning(UserWarning):
    """A heuristic sanity check on a declared analytic property failed."""
