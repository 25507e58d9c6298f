"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid input data (failure times, samples, configuration values)."""


class EstimationError(RuntimeError):
    """A numerical estimation step failed (undefined MLE, divergent or
    non-convergent integral, degenerate sample)."""


class QuadratureError(EstimationError):
    """Adaptive quadrature failed to converge.

    Carries the partial integral value and the residual error estimate so
    callers can report diagnostics.
    """

    def __init__(self, message, partial=None, residual=None, limits=None):
        super().__init__(message)
        self.partial = partial
        self.residual = residual
        self.limits = limits
