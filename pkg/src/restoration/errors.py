"""Exception types raised by the restoration library."""


class RestorationError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(RestorationError, ValueError):
    """An input violates the preconditions of an operation."""


class NumericalFailure(RestorationError):
    """A numerical procedure could not produce a result."""


class UnsatisfiableConditionError(NumericalFailure):
    """The plateau-level equations have no solution 0 < c1 < c2 < 1."""
