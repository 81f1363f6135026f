"""Exception types shared across the package."""


class CovchainError(Exception):
    """Base class for all package errors."""


class StructuralError(CovchainError):
    """The chain is not irreducible or not a valid transition matrix."""


class CapacityError(CovchainError):
    """Input too large for an exact method."""


class PreconditionError(CovchainError):
    """A hypothesis required by a bound does not hold."""


class ValidationError(CovchainError):
    """An admissible/net sequence or metric is malformed."""


class NumericalError(CovchainError):
    """A linear solve failed or produced an inaccurate result."""


class ConfigError(CovchainError):
    """Bad command-line or suite configuration."""
