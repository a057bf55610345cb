"""Exception hierarchy shared by every gwc_bssrdf module."""

from __future__ import annotations


class BssrdfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(BssrdfError, ValueError):
    """A documented precondition on an input was violated."""


class DegenerateDistanceError(BssrdfError, ArithmeticError):
    """The query point lies on the refracted beam (d_r = 0)."""


class OutOfDomainError(BssrdfError, ValueError):
    """A coordinate falls outside the span of a tabulation grid."""


class ZeroMassError(BssrdfError, ValueError):
    """A density to be sampled integrates to zero."""


class ConvergenceError(BssrdfError, RuntimeError):
    """A root finder hit its iteration limit."""


class TableFormatError(BssrdfError, ValueError):
    """A serialized table could not be decoded."""


class CorruptHeaderError(TableFormatError):
    """Bad magic, unsupported version, or a stream too short to hold a header."""


class DimensionMismatchError(TableFormatError):
    """Header dimensions disagree with the grids or with the payload length."""


class InvariantViolationError(TableFormatError):
    """Decoded arrays break a documented table invariant."""


class SceneConfigError(InvalidParameterError):
    """A slab scene configuration is malformed."""
