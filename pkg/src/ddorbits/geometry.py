"""Planar rotations, symmetric configurations and the boundary sets.

Vectors are rows and rotate by right-multiplication::

    (x, y) @ R(theta),   R(theta) = [[cos, sin], [-sin, cos]]

so that ``(1, 0)`` rotated by ``pi/2`` is ``(0, 1)``.  Every function here
broadcasts over leading axes of its array arguments.
"""

from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import ConstraintError

#: Reflection across the x-axis, acting on row vectors.
B = np.array([[1.0, 0.0], [0.0, -1.0]])


class StartParams(NamedTuple):
    a1: float
    a2: float


class EndParams(NamedTuple):
    b1: float
    b2: float
    theta: float


class BoundarySet(Enum):
    V0 = "V0"
    V1 = "V1"  # rotated rectangles with b1, b2 >= 0 (prograde)
    V1_FREE = "V1~"  # rotated rectangles, signs of b1, b2 free (retrograde)


def rotation_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotate(v, theta):
    """Return ``v @ R(theta)``; ``v`` may have any leading shape ``(..., 2)``."""
    v = np.asarray(v, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    x, y = v[..., 0], v[..., 1]
    return np.stack([x * c - y * s, x * s + y * c], axis=-1)


def full_config(config):
    """Expand reduced ``(..., 2, 2)`` configurations to ``(..., 4, 2)``."""
    config = np.asarray(config, dtype=float)
    q1, q2 = config[..., 0, :], config[..., 1, :]
    return np.stack([q1, q2, -q2, -q1], axis=-2)


def start_config(a1, a2):
    if a1 < 0 or a2 < 0:
        raise ConstraintError(f"start parameters must be nonnegative, got a1={a1}, a2={a2}")
    return np.array([[-a1 - a2, 0.0], [-a1, 0.0]])


def end_config(b1, b2, theta):
    """Rectangle ``(-b1, -b2), (-b1, b2)`` rotated by ``theta``.

    No sign check is made: the retrograde family allows any real b1, b2.
    Use :func:`membership` or the prograde callers to enforce ``b >= 0``.
    """
    return rotate(np.array([[-b1, -b2], [-b1, b2]]), theta)


def membership(
    config, which: BoundarySet, tol: float, theta: Optional[float] = None
) -> Tuple[bool, Optional[tuple]]:
    """Test whether ``config`` lies in a boundary set, componentwise within ``tol``.

    Returns ``(True, params)`` with the recovered ``(a1, a2)`` or ``(b1, b2)``
    on success and ``(False, None)`` otherwise.  ``theta`` is required for the
    rectangle sets.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    config = np.asarray(config, dtype=float)
    if which is BoundarySet.V0:
        (x1, y1), (x2, y2) = config
        a1, a2 = -x2, x2 - x1
        params = (a1, a2)
        if a1 < -tol or a2 < -tol:
            return False, None
        recon = np.array([[-a1 - a2, 0.0], [-a1, 0.0]])
    else:
        if theta is None:
            raise ValueError("theta is required for the rectangle boundary sets")
        (x1, y1), (x2, y2) = rotate(config, -theta)
        b1 = -(x1 + x2) / 2.0
        b2 = (y2 - y1) / 2.0
        params = (b1, b2)
        if which is BoundarySet.V1 and (b1 < -tol or b2 < -tol):
            return False, None
        recon = end_config(b1, b2, theta)
    if np.max(np.abs(recon - config)) > tol:
        return False, None
    return True, params
