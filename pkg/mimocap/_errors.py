class NumericalError(RuntimeError):
    """Base class for numerical failures (as opposed to invalid inputs)."""


class ConvergenceError(NumericalError):
    """The fixed-point iteration did not reach its tolerance."""

    def __init__(self, message: str, iterations: int, residual: float) -> None:
        super().__init__(message)
        self.iterations: int = iterations
        self.residual: float = residual


class StateInvariantError(NumericalError):
    """A converged state violates the positivity or boundedness it must satisfy."""


class EmbeddingError(NumericalError):
    """A covariance sequence could not be embedded in a nonnegative circulant spectrum."""


class QuadratureError(NumericalError):
    """An adaptive quadrature did not reach its requested accuracy."""


class ConfigError(ValueError):
    """A configuration file could not be parsed or describes an invalid model."""
