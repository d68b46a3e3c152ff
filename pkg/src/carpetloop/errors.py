"""Exception types shared across the package.

Geometry and word operations raise; validation-style operations return
report objects instead (see grid.validate_loop, homotopy.verify_containment).
"""

from __future__ import annotations


class CarpetLoopError(Exception):
    """Base class for all package errors."""


class LevelOutOfRange(CarpetLoopError):
    """A level argument is outside 1..depth for the given space."""


class DegeneratePosition(CarpetLoopError):
    """The loop touches a reference object it must stay clear of.

    Raised when an edge lies on a corridor boundary line, or when a
    vertex or edge meets a puncture ray.
    """


class RefinementViolation(CarpetLoopError):
    """The refinement structure between two word levels is inconsistent.

    This should never fire on a validated loop; it indicates an encoding
    bug and carries enough detail to reproduce.
    """


class Unroutable(CarpetLoopError):
    """A word cannot be realized by the canonical routing.

    Carries the offending letter pair index when the failure is local.
    """

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class MalformedDiagram(CarpetLoopError):
    """A matching is not a sign-consistent perfect matching for its word."""


class CapExceeded(CarpetLoopError):
    """A search exceeded its configured cap; partial results attached."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class NoInducedDiagram(CarpetLoopError):
    """A diagram induces no valid coarser diagram.

    Either the inputs are malformed or this is a counterexample to the
    tested induction property; callers log the payload loudly.
    """


class NotFoundError(CarpetLoopError):
    """No coherent scheme exists through the reported level."""

    def __init__(self, level: int, message: str = ""):
        super().__init__(message or f"no coherent scheme through level {level}")
        self.level = level


class AssignmentFailure(CarpetLoopError):
    """No admissible target region exists for a homotopy 2-cell."""

    def __init__(self, message: str, face=None):
        super().__init__(message)
        self.face = face


class IncompatibleHomotopies(CarpetLoopError):
    """Two level homotopies do not share a loop or are not consecutive."""
