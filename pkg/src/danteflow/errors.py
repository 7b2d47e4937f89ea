"""Exception types shared across the package.

The CLI maps these onto exit codes: ``DomainError`` (and subclasses) -> 3,
``IntegrationFailureError`` -> 4.
"""
from __future__ import annotations


class DanteFlowError(Exception):
    """Base class for all library errors."""


class DomainError(DanteFlowError, ValueError):
    """Input violates a precondition (non-positive, unordered, out of range)."""


class DegenerateShapeError(DomainError):
    """Shape has a vanishing stretch factor (the excluded y = x edge)."""


class CollapseReachedError(DomainError):
    """A closed-form evaluation was requested at or past the collapse time."""


class SingularSlopeError(DomainError):
    """The flow-line slope denominator vanishes; trace the full ODE instead."""


class SingularMapError(DomainError):
    """The eigenvalue-ratio map is singular at this point (y = 1)."""


class IntegrationFailureError(DanteFlowError):
    """Step-size underflow or solver breakdown; carries the partial trajectory."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
