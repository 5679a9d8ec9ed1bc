"""Exception hierarchy shared by every qvol module."""


class QvolError(Exception):
    """Base class for all library errors."""


class DomainError(QvolError, ValueError):
    """Input outside the domain where an operation is defined."""


class BranchError(QvolError):
    """A logarithm or dilogarithm argument sits on (or too close to) its cut."""


class ToleranceError(QvolError):
    """A numerical procedure could not reach its requested accuracy."""


class PrecisionError(QvolError):
    """Floating point range exceeded; use the extended backend instead."""


class InternalError(QvolError):
    """An invariant that should hold by construction was violated."""


class ContinuationError(QvolError):
    """Newton continuation lost track of the solution branch."""

    def __init__(self, message, last_parameter=None):
        super().__init__(message)
        self.last_parameter = last_parameter


class DegenerateError(QvolError):
    """Degenerate geometric data (flat tetrahedron, double root, zero denominator)."""


class ConsistencyError(QvolError):
    """Two independent routes to the same quantity disagree."""


class InsufficientData(QvolError):
    """Too few samples for a requested fit."""
