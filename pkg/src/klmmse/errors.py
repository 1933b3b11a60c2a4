"""Exception types raised across the package."""


class KlMmseError(Exception):
    """Base class for package errors."""


class DimensionMismatch(KlMmseError, ValueError):
    pass


class NotPositiveDefinite(KlMmseError, ValueError):
    pass


class DomainError(KlMmseError, ValueError):
    """Argument outside the domain of a special function."""


class NonConvergent(KlMmseError, RuntimeError):
    """An iteration budget ran out before the tolerance was met.

    ``state`` carries whatever bracket / iterate information the caller had
    at the time, for diagnostics.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class InfeasibleAlpha(NonConvergent):
    """Positive definiteness could not be kept for the requested multiplier."""
