"""Exception types shared across the package."""


class NbpError(Exception):
    """Base class for all package-specific errors."""


class DomainError(NbpError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class NumericError(NbpError, ArithmeticError):
    """An iterative numerical routine failed to converge.

    Carries the best estimate reached so the caller can inspect how far
    the iteration got.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class ResourceLimitError(NbpError, RuntimeError):
    """A request would exceed a hard memory or size bound."""


class CapabilityError(NbpError, RuntimeError):
    """An operation needs an optional capability the inputs do not provide."""


class DegenerateTruncationError(NbpError, ValueError):
    """A truncation policy retained fewer than two points."""
