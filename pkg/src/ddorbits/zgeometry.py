"""Relative coordinates ``Z1 = q1 - q2`` and ``Z2 = q1 + q2``.

In these coordinates the kinetic energy is ``(|Z1'|^2 + |Z2'|^2) / 2`` and the
potential depends only on ``|Z1|``, ``|Z2|`` and the angle between the lines
they span.  Reflecting ``Z1`` into the closed second quadrant and ``Z2`` into
the closed third quadrant never increases the potential, which is what makes
the retrograde family cheaper than the prograde one.
"""

import math
from typing import NamedTuple

import numpy as np

from .action import DiscretePath
from .errors import CollisionError, DomainError


class ZState(NamedTuple):
    z1: np.ndarray
    z2: np.ndarray


def to_z(config) -> ZState:
    """Accepts ``(..., 2, 2)`` reduced configurations."""
    config = np.asarray(config, dtype=float)
    q1, q2 = config[..., 0, :], config[..., 1, :]
    return ZState(q1 - q2, q1 + q2)


def from_z(z: ZState):
    z1, z2 = np.asarray(z[0], dtype=float), np.asarray(z[1], dtype=float)
    return np.stack([(z1 + z2) / 2.0, (z2 - z1) / 2.0], axis=-2)


def _line_angle(u, v):
    nu, nv = np.linalg.norm(u, axis=-1), np.linalg.norm(v, axis=-1)
    if np.any(nu == 0) or np.any(nv == 0):
        raise DomainError("the angle between lines needs two nonzero vectors")
    # atan2 is accurate at both ends of [0, pi], unlike arccos
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = np.sum(u * v, axis=-1)
    beta = np.arctan2(np.abs(cross), dot)
    return np.where(beta > np.pi / 2, np.pi - beta, beta)


def delta(z: ZState):
    """Angle in ``[0, pi/2]`` between the lines spanned by ``Z1`` and ``Z2``."""
    out = _line_angle(np.asarray(z[0], dtype=float), np.asarray(z[1], dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _mixed_sq(r1, r2, d):
    c = np.cos(d)
    return r1 * r1 + r2 * r2 + 2 * r1 * r2 * c, r1 * r1 + r2 * r2 - 2 * r1 * r2 * c


def _check_radii(r1, r2, minus):
    if np.any(np.asarray(r1) <= 0) or np.any(np.asarray(r2) <= 0):
        raise DomainError("radii must be positive")
    if np.any(np.asarray(minus) <= 0):
        raise CollisionError("pair 1-3 or 2-4 collides (r1 = r2 and delta = 0)")


def potential_z(r1, r2, d):
    """``U = 2/r1 + 2/r2 + 1/|Z1 + Z2| + 1/|Z1 - Z2|`` from radii and line angle."""
    plus, minus = _mixed_sq(r1, r2, d)
    _check_radii(r1, r2, minus)
    return 2.0 / r1 + 2.0 / r2 + 1.0 / np.sqrt(plus) + 1.0 / np.sqrt(minus)


def dU_ddelta(r1, r2, d):
    plus, minus = _mixed_sq(r1, r2, d)
    _check_radii(r1, r2, minus)
    k = r1 * r2 * np.sin(d)
    return k / plus**1.5 - k / minus**1.5


def potential_q(config):
    """Direct four-body potential of reduced configurations ``(..., 2, 2)``."""
    config = np.asarray(config, dtype=float)
    q1, q2 = config[..., 0, :], config[..., 1, :]
    n = lambda v: np.linalg.norm(v, axis=-1)  # noqa: E731
    return 2 / n(q1 - q2) + 2 / n(q1 + q2) + 1 / (2 * n(q1)) + 1 / (2 * n(q2))


def reflect_z(z: ZState) -> ZState:
    """Fold ``Z1`` into the closed second quadrant and ``Z2`` into the closed third."""
    z1, z2 = np.abs(np.asarray(z[0], dtype=float)), np.abs(np.asarray(z[1], dtype=float))
    return ZState(z1 * np.array([-1.0, 1.0]), -z2)


def reflect_path_z(path: DiscretePath) -> DiscretePath:
    return DiscretePath(from_z(reflect_z(to_z(path.nodes))), path.t_start, path.t_end)


def adjacent_closed_quadrants(z: ZState, tol=0.0):
    """True when ``Z1`` and ``Z2`` lie in two adjacent closed quadrants.

    Two vectors strictly inside one quadrant do not qualify.  A vector on an
    axis belongs to two closed quadrants, one of which always borders the
    other vector's, so the test reduces to the two lines having slopes of
    opposite sign (or zero/infinite).  Vectorized over leading axes.
    """
    z1, z2 = np.asarray(z[0], dtype=float), np.asarray(z[1], dtype=float)
    return z1[..., 0] * z1[..., 1] * z2[..., 0] * z2[..., 1] <= tol


def delta_tilde_geq(z: ZState):
    """``(delta, delta_tilde)`` for a state and its reflection; ``delta_tilde >= delta``."""
    d = delta(z)
    dt = delta(reflect_z(z))
    if np.any(np.asarray(dt) < np.asarray(d) - 1e-12):
        raise AssertionError(f"reflected angle {dt} below original {d}")
    return d, dt


def quadrant_confinement(path: DiscretePath, tol) -> bool:
    z1, z2 = to_z(path.nodes)
    return bool(
        np.all(z1[:, 0] <= tol) and np.all(z1[:, 1] >= -tol) and np.all(z2[:, 0] <= tol) and np.all(z2[:, 1] <= tol)
    )


def segment_kinetic_z(path: DiscretePath):
    """Per-segment ``(|dZ1|^2 + |dZ2|^2) / (2 dt)``; equals the kinetic action of each segment."""
    z1, z2 = to_z(path.nodes)
    d1, d2 = np.diff(z1, axis=0), np.diff(z2, axis=0)
    return (np.sum(d1 * d1, axis=1) + np.sum(d2 * d2, axis=1)) / (2.0 * path.dt)


def compare_families(theta, n=160, **options):
    """Minimize both families at ``theta``; returns ``(a_prograde, a_retrograde, gap, solutions)``."""
    from .minimizer import Family, Problem, minimize

    if not 0 < theta < math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2), got {theta}")
    pro = minimize(Problem(theta, n, Family.PROGRADE, **options))
    retro_init = reflect_path_z(pro.path)
    retro = minimize(Problem(theta, n, Family.RETROGRADE, init=retro_init, **options))
    gap = pro.action.total - retro.action.total
    return pro.action.total, retro.action.total, gap, (pro, retro)
