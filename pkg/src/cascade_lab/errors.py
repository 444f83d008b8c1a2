"""Exception hierarchy for cascade-lab.

Every failure a run can report derives from :class:`CascadeLabError`, so the
command line front end can map library failures to a single exit status.
"""

from typing import Any, Optional, Tuple


class CascadeLabError(Exception):
    pass


class ParameterError(CascadeLabError, ValueError):
    """A precondition on the inputs of an operation does not hold."""


class NonPositiveInput(ParameterError):
    pass


class NoSolution(CascadeLabError):
    pass


# Integration


class IntegrationError(CascadeLabError):
    pass


class StepUnderflow(IntegrationError):
    pass


class BudgetExceeded(IntegrationError):
    pass


class NoCrossing(IntegrationError):
    pass


class TangentialCrossing(IntegrationError):
    pass


class InaccurateCrossing(IntegrationError):
    """The located hit misses its section by more than ``event_tol``."""


# Saddle frames


class FrameError(CascadeLabError):
    pass


class DegenerateAngle(FrameError):
    pass


class InfeasibleMass(FrameError):
    pass


class DegenerateTarget(FrameError):
    pass


class EscapedNeighborhood(FrameError):
    def __init__(self, message: str, mode: Optional[int] = None):
        super().__init__(message)
        self.mode = mode


# Cascade, lattice and Galerkin


class SearchFailed(CascadeLabError):
    """No corridor point at ``saddle``; ``report`` holds the rejected orbit's
    diagnostics when one was produced."""

    def __init__(self, saddle: int, message: str = "", report: Any = None):
        super().__init__(message or f"no corridor point found at saddle {saddle}")
        self.saddle = saddle
        self.report = report


class PlacementExhausted(CascadeLabError):
    def __init__(self, generation: int, message: str = ""):
        super().__init__(
            message or f"no admissible placement left at generation {generation}"
        )
        self.generation = generation


class UnlinkedPoint(CascadeLabError):
    def __init__(self, point: Tuple[int, int]):
        super().__init__(f"lattice point {point} has no family record")
        self.point = point


class OutOfWindow(CascadeLabError):
    pass
