"""Numerical minimization of the exact piecewise-linear action.

Free variables are the start parameters ``(a1, a2)``, the interior nodes and
the end parameters ``(b1, b2)``.  The boundary nodes are linear in these, so
the whole path is ``nodes = M @ v`` for a sparse matrix ``M`` that depends on
the angle only, and every iterate lies exactly on the boundary sets.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse

from .action import ActionBreakdown, DiscretePath, action_and_gradient, path_action
from .errors import CollisionError, DomainError
from .geometry import EndParams, StartParams, end_config, rotation_matrix, start_config
from .optim import minimize_bounded

#: The test paths cover angles up to this value.
TEST_PATH_LIMIT = 0.143 * math.pi

_STRAIGHT_SCHEDULE = (1e-3, 1e-5, 0.0)


class Family(Enum):
    PROGRADE = "prograde"
    RETROGRADE = "retrograde"


class Init(Enum):
    TEST_PATH = "testpath"
    STRAIGHT = "straight"


@dataclass
class Problem:
    theta: float
    n_segments: int = 160
    family: Family = Family.PROGRADE
    init: Union[Init, DiscretePath, None] = None
    max_iters: int = 100000
    grad_tol: Optional[float] = None
    softening_schedule: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not 0 < self.theta < math.pi / 2:
            raise DomainError(f"theta must lie in (0, pi/2), got {self.theta}")
        if self.n_segments < 10:
            raise ValueError("n_segments must be at least 10")
        self.family = Family(self.family)
        if isinstance(self.init, str):
            self.init = Init(self.init)

    @property
    def dim(self):
        return 4 + 4 * (self.n_segments - 1)

    @property
    def tolerance(self):
        return self.grad_tol if self.grad_tol is not None else 1e-8 * math.sqrt(self.dim)


@dataclass
class Solution:
    theta: float
    family: Family
    path: DiscretePath
    action: ActionBreakdown
    start_params: StartParams
    end_params: EndParams
    grad_norm: float
    iterations: int
    converged: bool
    message: str = ""
    history: list = field(default_factory=list, repr=False)

    @property
    def n_segments(self):
        return self.path.n_segments

    def to_dict(self):
        return {
            "theta": self.theta,
            "family": self.family.value,
            "n_segments": self.n_segments,
            "action": self.action.as_dict(),
            "start_params": {"a1": self.start_params.a1, "a2": self.start_params.a2},
            "end_params": {"b1": self.end_params.b1, "b2": self.end_params.b2},
            "nodes": self.path.nodes.tolist(),
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data):
        theta = float(data["theta"])
        nodes = np.array(data["nodes"], dtype=float)
        if nodes.shape != (int(data["n_segments"]) + 1, 2, 2):
            raise ValueError("node array does not match n_segments")
        sp, ep = data["start_params"], data["end_params"]
        return cls(
            theta=theta,
            family=Family(data["family"]),
            path=DiscretePath(nodes),
            action=ActionBreakdown(**{k: float(v) for k, v in data["action"].items()}),
            start_params=StartParams(float(sp["a1"]), float(sp["a2"])),
            end_params=EndParams(float(ep["b1"]), float(ep["b2"]), theta),
            grad_norm=float(data["grad_norm"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
            message=data.get("message", ""),
        )

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, source):
        """Parse a JSON string, or read it from a file path."""
        text = source
        if not source.lstrip().startswith("{"):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))


def embedding(theta, n_segments):
    """Sparse ``M`` with ``nodes.ravel() = M @ v`` for ``v = (a1, a2, interior..., b1, b2)``."""
    n_nodes = n_segments + 1
    dim = 4 + 4 * (n_segments - 1)
    rows, cols, vals = [], [], []

    def put(r, c, x):
        rows.append(r)
        cols.append(c)
        vals.append(x)

    # start: q1 = (-a1 - a2, 0), q2 = (-a1, 0)
    put(0, 0, -1.0)
    put(0, 1, -1.0)
    put(2, 0, -1.0)
    for k in range(4 * (n_segments - 1)):
        put(4 + k, 2 + k, 1.0)
    # end: (-b1, -b2) R and (-b1, b2) R
    rot = rotation_matrix(theta)
    base = 4 * n_segments
    ib1, ib2 = dim - 2, dim - 1
    for axis in range(2):
        put(base + axis, ib1, -rot[0, axis])
        put(base + axis, ib2, -rot[1, axis])
        put(base + 2 + axis, ib1, -rot[0, axis])
        put(base + 2 + axis, ib2, rot[1, axis])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(4 * n_nodes, dim))


def lower_bounds(problem: Problem):
    lower = np.full(problem.dim, -np.inf)
    lower[:2] = 0.0
    if problem.family is Family.PROGRADE:
        lower[-2:] = 0.0
    return lower


def encode(path: DiscretePath, problem: Problem):
    """Decision vector of ``path``; boundary nodes are projected onto their sets.

    For the prograde family negative parameters are clipped to zero.
    """
    nodes = path.nodes
    if nodes.shape[0] != problem.n_segments + 1:
        raise ValueError(f"path has {nodes.shape[0] - 1} segments, problem expects {problem.n_segments}")
    (x1, _), (x2, _) = nodes[0]
    a1, a2 = max(-x2, 0.0), max(x2 - x1, 0.0)
    end = nodes[-1] @ rotation_matrix(problem.theta).T
    b1 = -(end[0, 0] + end[1, 0]) / 2.0
    b2 = (end[1, 1] - end[0, 1]) / 2.0
    if problem.family is Family.PROGRADE:
        b1, b2 = max(b1, 0.0), max(b2, 0.0)
    return np.concatenate([[a1, a2], nodes[1:-1].ravel(), [b1, b2]])


def decode(v, problem: Problem) -> DiscretePath:
    v = np.asarray(v, dtype=float)
    if v.shape != (problem.dim,):
        raise ValueError(f"decision vector has shape {v.shape}, expected ({problem.dim},)")
    m = embedding(problem.theta, problem.n_segments)
    return DiscretePath((m @ v).reshape(-1, 2, 2))


class _Objective:
    def __init__(self, problem: Problem, soft=0.0):
        self.problem = problem
        self.soft = soft
        self.m = embedding(problem.theta, problem.n_segments)
        self.dt = 1.0 / problem.n_segments

    def __call__(self, v):
        nodes = (self.m @ v).reshape(-1, 2, 2)
        with np.errstate(all="ignore"):
            f, g = action_and_gradient(nodes, self.dt, self.soft)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            return math.inf, None
        return f, self.m.T @ g.ravel()

    def kinetic_hessian(self):
        n = self.problem.n_segments
        diff = sparse.diags([-np.ones(n), np.ones(n)], [0, 1], shape=(n, n + 1))
        d4 = sparse.kron(diff, sparse.identity(4)).tocsr() @ self.m
        return (2.0 / self.dt) * (d4.T @ d4)


def objective_and_gradient(v, problem: Problem, soft=0.0):
    """Exact action of the decoded path and its gradient; ``inf`` on a collision."""
    return _Objective(problem, soft)(np.asarray(v, dtype=float))


def straight_path(problem: Problem, a=(1.0, 1.0), b=(1.5, 0.5)):
    b1, b2 = b
    if problem.family is Family.RETROGRADE:
        b2 = -b2
    start = start_config(*a)
    end = end_config(b1, b2, problem.theta)
    t = np.linspace(0.0, 1.0, problem.n_segments + 1)[:, None, None]
    return DiscretePath((1 - t) * start + t * end)


def initial_path(problem: Problem):
    """Starting path and softening schedule for ``problem``."""
    from .testpaths import build_test_path
    from .zgeometry import reflect_path_z

    init = problem.init
    if init is None:
        init = Init.TEST_PATH if problem.theta <= TEST_PATH_LIMIT else Init.STRAIGHT
    if isinstance(init, DiscretePath):
        path, schedule = init.resampled(problem.n_segments), (0.0,)
    elif init is Init.TEST_PATH:
        path, schedule = build_test_path(problem.theta).resampled(problem.n_segments), (0.0,)
        if problem.family is Family.RETROGRADE:
            path = reflect_path_z(path)
    else:
        path, schedule = straight_path(problem), _STRAIGHT_SCHEDULE
    if problem.softening_schedule is not None:
        schedule = tuple(problem.softening_schedule)
    if schedule[-1] != 0.0:
        schedule = tuple(schedule) + (0.0,)
    return path, schedule


def minimize(problem: Problem, callback=None) -> Solution:
    """Minimize the action over the family's path space starting from ``problem.init``.

    Softened stages (if any) run first; the last stage is always exact, so the
    reported action is the true action of the returned path.
    """
    path, schedule = initial_path(problem)
    v = encode(path, problem)
    lower = lower_bounds(problem)
    iterations = 0
    history = []
    result = None
    for soft in schedule:
        obj = _Objective(problem, soft)
        tol = problem.tolerance if soft == 0.0 else max(problem.tolerance, 1e-6)
        result = minimize_bounded(
            obj,
            v,
            lower=lower,
            precond=obj.kinetic_hessian(),
            grad_tol=tol,
            max_iters=problem.max_iters,
            callback=callback,
        )
        v = result.x
        iterations += result.iterations
        history.extend(result.history)

    final = decode(v, problem)
    try:
        action = path_action(final)
    except CollisionError as exc:
        raise CollisionError(f"minimizer ended on a collision: {exc}", exc.pair, exc.segment) from exc
    return Solution(
        theta=problem.theta,
        family=problem.family,
        path=final,
        action=action,
        start_params=StartParams(float(v[0]), float(v[1])),
        end_params=EndParams(float(v[-2]), float(v[-1]), problem.theta),
        grad_norm=result.grad_norm,
        iterations=iterations,
        converged=result.converged,
        message=result.message,
        history=history,
    )


def reduced_acceleration(config):
    """Newtonian acceleration of q1 and q2 under the symmetry ``q3 = -q2``, ``q4 = -q1``."""
    config = np.asarray(config, dtype=float)
    q1, q2 = config[..., 0, :], config[..., 1, :]

    def pull(v):
        return v / np.linalg.norm(v, axis=-1, keepdims=True) ** 3

    acc1 = pull(q2 - q1) + pull(-q2 - q1) + pull(-2 * q1)
    acc2 = pull(q1 - q2) + pull(-q1 - q2) + pull(-2 * q2)
    return np.stack([acc1, acc2], axis=-2)


def el_residual(path: DiscretePath):
    """Per-interior-node ``|second difference - acceleration|`` (max over both bodies)."""
    q = path.nodes
    dt = path.dt
    second = (q[2:] - 2 * q[1:-1] + q[:-2]) / dt**2
    res = second - reduced_acceleration(q[1:-1])
    return np.max(np.linalg.norm(res, axis=-1), axis=-1)


def euler_lagrange_residual(sol: Solution):
    """``(max_residual, per_node_residuals)`` of the discrete equations of motion."""
    res = el_residual(sol.path)
    return float(np.max(res)), res


def boundary_residuals(path: DiscretePath, theta):
    """First-variation boundary conditions, relative to the maximum node speed.

    Returns ``(start, end)``: the largest x-velocity at ``t = 0`` and the norm
    of ``q1'(1) + q2'(1) B R(2 theta)``, both from fourth-order one-sided
    differences.
    """
    from .extension import one_sided_velocity

    from .geometry import B

    q = path.nodes
    v0 = one_sided_velocity(q, path.dt, at_end=False)
    v1 = one_sided_velocity(q, path.dt, at_end=True)
    speed = np.max(np.linalg.norm(np.diff(q, axis=0), axis=-1)) / path.dt
    start = np.max(np.abs(v0[:, 0]))
    end = np.linalg.norm(v1[0] + v1[1] @ B @ rotation_matrix(2 * theta))
    return float(start / speed), float(end / speed)
