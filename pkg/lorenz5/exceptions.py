"""Error types raised by lorenz5."""


class Lorenz5Error(Exception):
    """Base class for every error raised by this package."""


class DomainError(Lorenz5Error, ValueError):
    """Mathematically invalid input (non-finite state, M <= 0, I < 0, ...)."""


class ConfigurationError(Lorenz5Error, ValueError):
    """Invalid settings: unknown methods, empty grids, malformed config files."""


class QuadratureError(Lorenz5Error, RuntimeError):
    """Quadrature did not reach the requested tolerance.

    Attributes:
        estimate: Best value found before giving up.
        error: Error estimate attached to that value.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
