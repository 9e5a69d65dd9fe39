"""Variational construction of double-double orbits in the equal-mass
parallelogram four-body problem.

Units are fixed throughout: G = 1 and every mass equals 1.  A reduced
configuration is a ``(2, 2)`` array ``[[q1x, q1y], [q2x, q2y]]``; bodies 3
and 4 are implied by ``q3 = -q2`` and ``q4 = -q1``.
"""

from .errors import CollisionError, ConstraintError, DegenerateSegmentError, DomainError

__version__ = "0.1.0"

__all__ = [
    "CollisionError",
    "ConstraintError",
    "DegenerateSegmentError",
    "DomainError",
]
