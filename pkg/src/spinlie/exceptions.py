"""Exception types raised by spinlie."""


class SpinLieError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SpinLieError, ValueError):
    """An input violates the documented precondition of an operation."""


class BranchError(SpinLieError, ValueError):
    """The principal logarithm is undefined (the element is -identity)."""


class DegenerateFieldError(SpinLieError, ValueError):
    """The azimuth of the field is undefined where it is needed."""


class RangeError(SpinLieError, ValueError):
    """A tabulated quantity was evaluated outside its time range."""


class PoleError(SpinLieError, ValueError):
    """A formula was evaluated at one of its poles."""


class PreconditionError(SpinLieError, ValueError):
    """An operation requiring an integrable field received a non-integrable one."""


class ConsistencyError(SpinLieError, RuntimeError):
    """Internal drift exceeded the level that renormalisation may silently absorb."""
