"""Exception types shared across the package."""


class PlaneSearchError(Exception):
    """Base class for package-specific errors."""


class FitFailure(PlaneSearchError):
    """The MAP optimizer hit a non-finite objective value.

    Carries the last iterate at which the objective was still finite so
    callers can inspect or resume from it.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConstructionFailure(PlaneSearchError):
    """No restart of the plane optimizer produced a finite objective."""


class InvalidState(PlaneSearchError):
    """Operation called on a session in the wrong lifecycle state."""


class RejectedChoice(PlaneSearchError):
    """A grid cell outside the design space was clicked."""


class SimulationError(PlaneSearchError):
    """A simulated session could not progress (no valid cell to click)."""
