"""Exception types raised across the package."""

from __future__ import annotations


class KreissLabError(Exception):
    """Base class for all package errors."""


class InputError(KreissLabError, ValueError):
    """Malformed or out-of-domain input."""


class SingularityError(KreissLabError, ArithmeticError):
    """A shifted matrix turned out to be numerically singular."""

    def __init__(self, message: str, z: complex | None = None, theta: float | None = None):
        super().__init__(message)
        self.z = z
        self.theta = theta


class PreconditionError(KreissLabError, ValueError):
    """An operation was called outside the regime where it is meaningful."""


class ResourceError(KreissLabError, MemoryError):
    """Requested object exceeds the dense size cap."""


class RangeError(KreissLabError, OverflowError):
    """Result not representable in double precision."""


class AdmissibilityError(KreissLabError, ValueError):
    """A curve failed the integrability test."""


class InvariantViolation(KreissLabError, ValueError):
    """A data type invariant failed on construction."""


class ClaimViolation(KreissLabError, AssertionError):
    """A numerically checked inequality did not hold."""

    def __init__(self, message: str, value: float | None = None, bound: float | None = None):
        super().__init__(message)
        self.value = value
        self.bound = bound
