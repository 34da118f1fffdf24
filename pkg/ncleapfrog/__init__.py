"""Non-commutative leapfrog map, bi-orthogonal polynomials and network face-weight brackets."""

from __future__ import annotations

from ncleapfrog.algebra import Backend, RingValue, ring_inv
from ncleapfrog.errors import DegenerateConfiguration, NCLeapfrogError, NotInvertible
from ncleapfrog.leapfrog import LeapfrogState, Mode, step_vertices, trajectory

__all__ = [
    "Backend",
    "DegenerateConfiguration",
    "LeapfrogState",
    "Mode",
    "NCLeapfrogError",
    "NotInvertible",
    "RingValue",
    "ring_inv",
    "step_vertices",
    "trajectory",
]
