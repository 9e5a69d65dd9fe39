"""Extend a path on ``[0, 1]`` to ``[0, 4k]`` by reflections and rotations.

On ``[1, 2]`` the bodies are swapped, time is reversed and the configuration
is reflected across the line at angle ``theta``; on ``[2, 4]`` the ``[0, 2]``
piece is swapped and rotated by ``2 theta``; every later block of length 4 is
the first one rotated by a multiple of ``4 theta``.  All maps act on node
data only.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .action import DiscretePath
from .errors import ConstraintError
from .geometry import B, BoundarySet, full_config, membership, rotate, rotation_matrix

_MEMBERSHIP_TOL = 1e-9


class Closure(NamedTuple):
    periodic: bool
    period: Optional[int] = None
    l1: Optional[int] = None
    k1: Optional[int] = None

    def describe(self):
        return f"Periodic, period {self.period}" if self.periodic else "QuasiPeriodic"


def _swap(nodes):
    return nodes[..., ::-1, :]


def _check_start(path):
    ok, _ = membership(path.nodes[0], BoundarySet.V0, _tol(path))
    if not ok:
        raise ConstraintError("path does not start in V0")


def _check_end(path, theta):
    ok, _ = membership(path.nodes[-1], BoundarySet.V1_FREE, _tol(path), theta=theta)
    if not ok:
        raise ConstraintError("path does not end on a rotated rectangle at angle theta")


def _tol(path):
    return _MEMBERSHIP_TOL * max(1.0, float(np.max(np.abs(path.nodes))))


def reflect_t0(path: DiscretePath) -> DiscretePath:
    """Even extension in x, odd in y, to ``[-1, 1]``."""
    _check_start(path)
    q = path.nodes
    left = q[:0:-1] @ B
    return DiscretePath(np.concatenate([left, q]), -path.t_end, path.t_end)


def _t1_block(q, theta):
    """Nodes on ``[1, 2]`` (excluding ``t = 1``) for nodes ``q`` on ``[0, 1]``."""
    return _swap(q[-2::-1]) @ B @ rotation_matrix(2 * theta)


def reflect_t1(path: DiscretePath, theta) -> DiscretePath:
    """Reflect about the final time: ``q1(t) = q2(2-t) B R(2 theta)`` and vice versa.

    A path on ``[0, 1]`` becomes one on ``[0, 2]``.
    """
    _check_end(path, theta)
    q = path.nodes
    return DiscretePath(np.concatenate([q, _t1_block(q, theta)]), path.t_start, 2 * path.t_end - path.t_start)


@dataclass(frozen=True)
class ExtendedOrbit:
    base: DiscretePath
    theta: float
    k: int
    nodes: np.ndarray  # (4 k n + 1, 2, 2)
    closure: Closure

    @property
    def n_base(self):
        return self.base.n_segments

    @property
    def times(self):
        return np.linspace(0.0, 4.0 * self.k, self.nodes.shape[0])

    @property
    def dt(self):
        return 1.0 / self.n_base

    def as_path(self):
        return DiscretePath(self.nodes, 0.0, 4.0 * self.k)

    def block(self, start, stop):
        """Nodes on ``[start, stop]`` for integer times."""
        n = self.n_base
        return self.nodes[start * n : stop * n + 1]

    def to_csv(self, path):
        full = full_config(self.nodes).reshape(len(self.nodes), 8) + 0.0  # no negative zeros
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "q1x", "q1y", "q2x", "q2y", "q3x", "q3y", "q4x", "q4y"])
            for t, row in zip(self.times, full):
                writer.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])


def extend_full(path: DiscretePath, theta, k=1, denom_max=64, tol=1e-9) -> ExtendedOrbit:
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_start(path)
    _check_end(path, theta)
    q = path.nodes
    first_two = np.concatenate([q, _t1_block(q, theta)])
    # [2, 4]: swap the [0, 2] piece and rotate by 2 theta
    block = np.concatenate([first_two, rotate(_swap(first_two[1:]), 2 * theta)])
    pieces = [block]
    for j in range(1, k):
        pieces.append(rotate(block[1:], 4 * j * theta))
    nodes = np.concatenate(pieces)
    nodes.setflags(write=False)
    return ExtendedOrbit(path, theta, k, nodes, detect_closure(theta, denom_max, tol))


def detect_closure(theta, denom_max=64, tol=1e-9) -> Closure:
    """Periodic with period ``4 l1`` when ``theta/pi`` is within ``tol`` of ``k1/l1``, ``l1 <= denom_max``."""
    if denom_max < 1 or tol < 0:
        raise ValueError("denom_max must be >= 1 and tol >= 0")
    ratio = theta / math.pi
    frac = Fraction(ratio).limit_denominator(denom_max)
    if abs(ratio - frac) <= tol:
        return Closure(True, 4 * frac.denominator, frac.denominator, frac.numerator)
    return Closure(False)


_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def one_sided_velocity(nodes, dt, at_end=False):
    """Fourth-order one-sided derivative at the first (or last) node."""
    nodes = np.asarray(nodes, dtype=float)
    if at_end:
        return -np.tensordot(_FORWARD, nodes[::-1][:5], axes=1) / dt
    return np.tensordot(_FORWARD, nodes[:5], axes=1) / dt


def max_speed(nodes, dt):
    return float(np.max(np.linalg.norm(np.diff(nodes, axis=0), axis=-1)) / dt)


def junction_c1_check(orbit: ExtendedOrbit):
    """Velocity mismatch at ``t = 0`` (against the even reflection) and at every interior integer time."""
    n, dt, q = orbit.n_base, orbit.dt, orbit.nodes
    v0 = one_sided_velocity(q, dt)
    # the left velocity at t = 0 is -v0 B, so the jump is v0 + v0 B
    out = [float(np.linalg.norm(v0 + v0 @ B))]
    for j in range(1, 4 * orbit.k):
        left = one_sided_velocity(q[: j * n + 1], dt, at_end=True)
        right = one_sided_velocity(q[j * n :], dt)
        out.append(float(np.linalg.norm(left - right)))
    return out
