"""Exception hierarchy shared by all modules."""


class FloqLyapError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(FloqLyapError, ValueError):
    pass


class SingularSystem(FloqLyapError):
    """The Lyapunov operator ``X -> AX + XA^T`` is numerically singular."""


class NumericalFailure(FloqLyapError):
    pass


class Divergence(FloqLyapError):
    """Time integration blew past the overflow guard."""


class Unstable(FloqLyapError):
    """The drift matrix is not Hurwitz, so no steady state exists."""

    def __init__(self, message, spectral_abscissa=None):
        super().__init__(message)
        self.spectral_abscissa = spectral_abscissa


class NonPhysical(FloqLyapError):
    pass


class DomainError(FloqLyapError, ValueError):
    pass


class IndexOutOfRange(FloqLyapError, IndexError):
    pass


class NotSettled(FloqLyapError):
    """Periodic settling tolerance was not met within the period budget."""


class ConfigError(FloqLyapError, ValueError):
    pass
