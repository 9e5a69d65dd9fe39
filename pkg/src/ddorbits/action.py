"""Exact action of piecewise-linear paths in the reduced parallelogram problem.

With ``q3 = -q2`` and ``q4 = -q1`` the Lagrangian is ``K + U`` with

    K = |q1'|^2 + |q2'|^2
    U = 2/|q1 - q2| + 2/|q1 + q2| + 1/(2|q1|) + 1/(2|q2|)

and splits into four Keplerian pieces, one per relative vector.  On each
linear segment the kinetic part is a constant and every potential term
reduces to ``int_0^1 du / |p0 + u (p1 - p0)|``, which has a closed form.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, DegenerateSegmentError

#: Segments shorter than this (squared length) use the constant-integrand branch.
DEGENERATE_S2 = 1e-24
#: Distance to the origin below which a segment is declared collision-singular.
COLLISION_DIST = 1e-12
#: Below this length-to-distance ratio the gradient uses a midpoint expansion.
_TAYLOR_RATIO = 1e-6

PAIRS = ("12", "13", "14", "23")
#: Maps (q1, q2) to the four relative vectors q1-q2, q1+q2, q1, q2.
PAIR_MATRIX = np.array([[1.0, -1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
KINETIC_COEF = np.array([0.25, 0.25, 0.5, 0.5])
POTENTIAL_COEF = np.array([2.0, 2.0, 0.5, 0.5])


@dataclass(frozen=True)
class DiscretePath:
    """Nodes of a constant-speed piecewise-linear path on a uniform grid.

    ``nodes`` has shape ``(n_segments + 1, 2, 2)``: node, body (q1, q2), xy.
    """

    nodes: np.ndarray
    t_start: float = 0.0
    t_end: float = 1.0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 3 or nodes.shape[1:] != (2, 2) or nodes.shape[0] < 2:
            raise ValueError(f"nodes must have shape (n+1, 2, 2) with n >= 1, got {nodes.shape}")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_segments(self):
        return self.nodes.shape[0] - 1

    @property
    def dt(self):
        return (self.t_end - self.t_start) / self.n_segments

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, self.n_segments + 1)

    def reversed(self):
        return DiscretePath(self.nodes[::-1], self.t_start, self.t_end)

    def rotated(self, phi):
        from .geometry import rotate

        return DiscretePath(rotate(self.nodes, phi), self.t_start, self.t_end)

    def resampled(self, n_segments):
        """Sample the piecewise-linear interpolant on a uniform grid of ``n_segments``."""
        old = np.linspace(0.0, 1.0, self.n_segments + 1)
        new = np.linspace(0.0, 1.0, n_segments + 1)
        flat = self.nodes.reshape(self.n_segments + 1, 4)
        out = np.stack([np.interp(new, old, flat[:, k]) for k in range(4)], axis=1)
        return DiscretePath(out.reshape(-1, 2, 2), self.t_start, self.t_end)


@dataclass(frozen=True)
class ActionBreakdown:
    total: float
    a12: float
    a13: float
    a14: float
    a23: float
    kinetic: float
    potential: float

    def as_dict(self):
        return {k: getattr(self, k) for k in ("total", "a12", "a13", "a14", "a23", "kinetic", "potential")}


def pair_vectors(nodes):
    """Relative vectors ``(..., 4, 2)`` for configurations ``(..., 2, 2)``."""
    return np.einsum("kb,...bx->...kx", PAIR_MATRIX, nodes)


def _frame(p0, p1, soft):
    # Coordinates along the segment line: |p0 + u D|^2 + soft^2 = s^2 (x^2 + eta^2), x = u + w.
    d = p1 - p0
    s2 = np.einsum("...x,...x->...", d, d)
    safe = np.where(s2 > 0, s2, 1.0)
    w = np.einsum("...x,...x->...", p0, d) / safe
    cross = p0[..., 0] * d[..., 1] - p0[..., 1] * d[..., 0]
    eta2 = (cross * cross / safe + soft * soft) / safe
    x0, x1 = w, w + 1.0
    r0 = np.sqrt(x0 * x0 + eta2)
    r1 = np.sqrt(x1 * x1 + eta2)
    return d, s2, w, eta2, x0, x1, r0, r1


def _delta_asinh(x0, x1, r0, r1, eta2):
    """``asinh(x1/eta) - asinh(x0/eta)`` for ``x1 - x0 = 1`` without cancellation."""
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = np.log1p((1.0 + (x1 + x0) / (r1 + r0)) / (x0 + r0))
        neg = np.log1p((1.0 - (x1 + x0) / (r1 + r0)) / (-x1 + r1))
        eta = np.sqrt(eta2)
        straddle = np.arcsinh(x1 / eta) + np.arcsinh(-x0 / eta)
    return np.where(x0 >= 0, pos, np.where(x1 <= 0, neg, straddle))


def segment_min_distance(p0, p1):
    """Minimum of ``|p0 + u (p1 - p0)|`` over ``u`` in [0, 1]."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    s2 = np.einsum("...x,...x->...", d, d)
    u = np.where(s2 > 0, -np.einsum("...x,...x->...", p0, d) / np.where(s2 > 0, s2, 1.0), 0.0)
    u = np.clip(u, 0.0, 1.0)
    return np.linalg.norm(p0 + u[..., None] * d, axis=-1)


def segment_integrals(p0, p1, soft=0.0):
    """Vectorized ``int_0^1 du / sqrt(|p0 + u (p1 - p0)|^2 + soft^2)``.

    No collision check is made; see :func:`segment_min_distance`.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d, s2, w, eta2, x0, x1, r0, r1 = _frame(p0, p1, soft)
    degenerate = s2 < DEGENERATE_S2
    with np.errstate(divide="ignore", invalid="ignore"):
        value = _delta_asinh(x0, x1, r0, r1, eta2) / np.sqrt(s2)
    if np.any(degenerate):
        mid = 0.5 * (p0 + p1)
        const = 1.0 / np.sqrt(np.einsum("...x,...x->...", mid, mid) + soft * soft)
        value = np.where(degenerate, const, value)
    return value


def segment_integrals_grad(p0, p1, soft=0.0):
    """Segment integrals and their gradients with respect to both endpoints.

    Returns ``(value, grad_p0, grad_p1)``.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d, s2, w, eta2, x0, x1, r0, r1 = _frame(p0, p1, soft)
    s = np.sqrt(s2)
    mid = 0.5 * (p0 + p1)
    rho_m2 = np.einsum("...x,...x->...", mid, mid) + soft * soft
    taylor = s2 < (_TAYLOR_RATIO**2) * rho_m2

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dF = _delta_asinh(x0, x1, r0, r1, eta2)
        value = dF / s
        same_sign = (x0 >= 0) | (x1 <= 0)
        a = (x1 + x0) / ((r1 + r0) * r0 * r1)
        b_same = (x1 + x0) / ((x1 * r0 + x0 * r1) * r0 * r1)
        b_straddle = (x1 / r1 - x0 / r0) / eta2
        b = np.where(same_sign, b_same, b_straddle)
        perp = p0 - w[..., None] * d
        s3 = (s2 * s)[..., None]
        g_int = (d * a[..., None] + perp * b[..., None]) / s3
        x_int = (d * (dF - eta2 * b)[..., None] + perp * a[..., None]) / s3
        j1 = x_int - w[..., None] * g_int

    if np.any(taylor):
        rho_m = np.sqrt(rho_m2)
        f = mid / (rho_m**3)[..., None]
        md = np.einsum("...x,...x->...", mid, d)
        jd = d / (rho_m**3)[..., None] - 3.0 * mid * (md / rho_m**5)[..., None]
        g_int = np.where(taylor[..., None], f, g_int)
        j1 = np.where(taylor[..., None], 0.5 * f + jd / 12.0, j1)
        value = np.where(s2 < DEGENERATE_S2, 1.0 / rho_m, value)
    return value, j1 - g_int, -j1


def segment_log_integral(a, b, c, d):
    """``int_0^1 du / sqrt((a + b u)^2 + (c + d u)^2)`` in closed form."""
    if b == 0.0 and d == 0.0:
        raise DegenerateSegmentError("(b, d) = (0, 0): the integrand is the constant 1/sqrt(a^2 + c^2)")
    p0 = np.array([a, c], dtype=float)
    p1 = p0 + np.array([b, d], dtype=float)
    if segment_min_distance(p0, p1) < COLLISION_DIST:
        raise CollisionError("segment passes through the origin")
    return float(segment_integrals(p0, p1))


def pair_segment_potential(p_start, p_end, dt):
    """``dt * int_0^1 du / |p_start + u (p_end - p_start)|``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    p0 = np.asarray(p_start, dtype=float)
    p1 = np.asarray(p_end, dtype=float)
    if segment_min_distance(p0, p1) < COLLISION_DIST:
        raise CollisionError("segment passes through the origin")
    return dt * float(segment_integrals(p0, p1))


def path_kinetic(path: DiscretePath):
    diff = np.diff(path.nodes, axis=0)
    return math.fsum((diff * diff).ravel()) / path.dt


def check_collisions(nodes):
    """Raise :class:`CollisionError` if any pair vector meets the origin on any segment."""
    rel = pair_vectors(nodes)
    dist = segment_min_distance(rel[:-1], rel[1:])
    if np.min(dist) < COLLISION_DIST:
        seg, pair = np.unravel_index(np.argmin(dist), dist.shape)
        raise CollisionError(
            f"collision of pair {PAIRS[pair]} on segment {seg} (distance {dist[seg, pair]:.3e})",
            pair=PAIRS[pair],
            segment=int(seg),
        )
    return float(np.min(dist))


def path_action(path: DiscretePath, soft=0.0) -> ActionBreakdown:
    """Exact action of a piecewise-linear path, split into its four binary parts.

    ``soft > 0`` replaces every distance ``r`` by ``sqrt(r^2 + soft^2)``; the
    minimizer uses it in early stages only.
    """
    nodes = path.nodes
    if soft == 0.0:
        check_collisions(nodes)
    rel = pair_vectors(nodes)
    dt = path.dt
    diff = np.diff(rel, axis=0)
    kin = KINETIC_COEF * np.einsum("jkx,jkx->k", diff, diff) / dt
    integrals = segment_integrals(rel[:-1], rel[1:], soft)
    pot = np.array([POTENTIAL_COEF[k] * dt * math.fsum(integrals[:, k]) for k in range(4)])
    parts = kin + pot
    return ActionBreakdown(
        total=math.fsum(parts),
        a12=float(parts[0]),
        a13=float(parts[1]),
        a14=float(parts[2]),
        a23=float(parts[3]),
        kinetic=path_kinetic(path),
        potential=math.fsum(pot),
    )


def action_and_gradient(nodes, dt, soft=0.0):
    """Total action and its gradient with respect to every node, shape ``(n+1, 2, 2)``.

    Collisions are not checked here; an exact collision yields ``inf``/``nan``.
    """
    nodes = np.asarray(nodes, dtype=float)
    diff = np.diff(nodes, axis=0)
    kinetic = math.fsum((diff * diff).ravel()) / dt
    grad = np.zeros_like(nodes)
    grad[:-1] -= 2.0 * diff / dt
    grad[1:] += 2.0 * diff / dt

    rel = pair_vectors(nodes)
    value, g0, g1 = segment_integrals_grad(rel[:-1], rel[1:], soft)
    weights = POTENTIAL_COEF * dt
    potential = math.fsum((value * weights).ravel())
    grel = np.zeros_like(rel)
    grel[:-1] += g0 * weights[:, None]
    grel[1:] += g1 * weights[:, None]
    grad += np.einsum("kb,jkx->jbx", PAIR_MATRIX, grel)
    return kinetic + potential, grad
