"""Exception types shared across the package."""


class EvoPoissonError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(EvoPoissonError, ValueError):
    """A model or operation parameter violates its documented contract."""


class DomainError(ParameterError):
    """An input lies outside the mathematical domain of an operation."""


class ResourceLimitError(EvoPoissonError, RuntimeError):
    """An enumeration or iteration exceeded its configured resource cap."""


class NumericalError(EvoPoissonError, ArithmeticError):
    """A numeric routine produced non-finite or inconsistent values."""
