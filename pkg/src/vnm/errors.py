"""Exception hierarchy shared by every module."""


class VNMError(Exception):
    """Base class for all library errors."""


class DomainError(VNMError, ValueError):
    """An argument lies outside the set on which the operation is defined."""


class ValidationError(VNMError, ValueError):
    """A constructed object violates its invariants."""


class ScopeError(VNMError, ValueError):
    """A lottery's support escapes the scope of a restricted preference."""


class CalibrationError(VNMError, RuntimeError):
    """Standard-gamble bisection could not locate an indifference point."""


class InapplicableError(VNMError, ValueError):
    """A construction's hypotheses do not hold for the given utility."""


class NetOverflowError(VNMError, OverflowError):
    """A counterexample net left the representable range.

    ``largest_n`` is the largest index that could still be built.
    """

    def __init__(self, message, largest_n):
        super().__init__(message)
        self.largest_n = largest_n


class BudgetError(VNMError, RuntimeError):
    """A finite prefix of an infinite construction was exhausted."""

    def __init__(self, message, uncovered=None):
        super().__init__(message)
        self.uncovered = uncovered


class NoFitError(VNMError, ValueError):
    """No affine relation can be fitted between two utilities."""
