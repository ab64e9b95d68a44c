"""Exception types raised by the library."""


class TrustDynError(Exception):
    """Base class for all library errors."""


class DomainError(TrustDynError, ValueError):
    """An argument lies outside the domain of the function."""


class RegimeError(TrustDynError, ValueError):
    """The requested operation is undefined in the current equilibrium regime."""


class AmbiguousLimitError(TrustDynError):
    """A terminal state is within tolerance of more than one rest point."""


class ConvergenceError(TrustDynError, RuntimeError):
    """A simulation probe did not settle within its time budget."""
