"""Keplerian action infima and the boundary-collision lower bounds.

For ``I(r) = int_0^T mu/2 |r'|^2 + alpha/|r| dt`` over planar paths whose
endpoints subtend the angle ``theta``::

    inf I = 3/2 (mu alpha^2 theta^2 T)^(1/3)

and with a collision somewhere the same value at ``theta = pi``.
"""

import math
from enum import Enum

import numpy as np
from scipy import sparse

from .action import segment_integrals_grad
from .errors import DomainError
from .optim import minimize_bounded

_CASE_DOMAIN = (0.0, math.pi / 6)


class CollisionCase(Enum):
    CASE1_Q1Q2_T0 = 1
    CASE2_Q2Q3_T0 = 2
    CASE3_Q1Q2_T1 = 3
    CASE4_Q1Q3_T1 = 4


def _cbrt(x):
    return x ** (1.0 / 3.0)


def kepler_inf(mu, alpha, T, theta):
    if not (mu > 0 and alpha > 0 and T > 0):
        raise DomainError("mu, alpha and T must be positive")
    if not 0 < theta <= math.pi:
        raise DomainError(f"theta must lie in (0, pi], got {theta}")
    return 1.5 * _cbrt(mu * alpha**2 * theta**2 * T)


def kepler_collision_inf(mu, alpha, T):
    return kepler_inf(mu, alpha, T, math.pi)


def _check_case_domain(theta):
    lo, hi = _CASE_DOMAIN
    if not lo < theta < hi:
        raise DomainError(f"the collision bounds need theta in (0, pi/6), got {theta}")


def case1_alpha_bound(theta, alpha):
    """Case-1 bound before the diagonal angle ``alpha`` is eliminated."""
    _check_case_domain(theta)
    return 1.5 * (
        _cbrt(2 * math.pi**2)
        + _cbrt(2 * theta**2)
        + _cbrt((theta - alpha) ** 2 / 4)
        + _cbrt((theta + alpha) ** 2 / 4)
    )


def case_bound(case: CollisionCase, theta):
    _check_case_domain(theta)
    c = _cbrt
    pi = math.pi
    if case is CollisionCase.CASE1_Q1Q2_T0:
        return 1.5 * (c(2 * pi**2) + c(2 * theta**2) + theta ** (2.0 / 3.0))
    if case is CollisionCase.CASE2_Q2Q3_T0:
        return 1.5 * (c(pi**2 / 2) + c(2 * theta**2) + c(2 * (theta + pi / 2) ** 2))
    if case is CollisionCase.CASE3_Q1Q2_T1:
        return 1.5 * (c(2 * pi**2) + 2 * c(2 * theta**2))
    if case is CollisionCase.CASE4_Q1Q3_T1:
        return 1.5 * (c(2 * pi**2) + 3 * c((theta + pi / 2) ** 2 / 4) + c((pi / 2 - theta) ** 2 / 4))
    raise ValueError(f"unknown case {case!r}")


def g1(theta):
    """Lower bound on the action of a minimizer with a boundary collision."""
    return case_bound(CollisionCase.CASE1_Q1Q2_T0, theta)


def g1_array(theta):
    """Vectorized :func:`g1` without the domain check."""
    theta = np.asarray(theta, dtype=float)
    return 1.5 * (np.cbrt(2 * np.pi**2) + np.cbrt(2 * theta**2) + np.cbrt(theta**2))


def total_collision_bound():
    return 3 * _cbrt(2 * math.pi**2) + 3 * _cbrt(math.pi**2 / 4)


def minimize_kepler_action(mu, alpha, T, theta, n_nodes=200, seed=0, max_iters=20000):
    """Numerically minimize the Keplerian action over piecewise-linear paths.

    The start point is constrained to the positive x-axis and the end point
    to the ray at angle ``theta``; ``n_nodes`` counts all nodes.  Returns
    ``(action, nodes, result)``.  Because the exact segment integrals are
    used, the returned action is an upper bound for the true infimum.
    """
    n_seg = n_nodes - 1
    dt = T / n_seg
    end_dir = np.array([math.cos(theta), math.sin(theta)])
    dim = 2 + 2 * (n_seg - 1)

    rows, cols, vals = [], [], []
    rows += [0, 1]
    cols += [0, 0]
    vals += [1.0, 0.0]
    for j in range(1, n_seg):
        for k in range(2):
            rows.append(2 * j + k)
            cols.append(1 + 2 * (j - 1) + k)
            vals.append(1.0)
    rows += [2 * n_seg, 2 * n_seg + 1]
    cols += [dim - 1, dim - 1]
    vals += [end_dir[0], end_dir[1]]
    embed = sparse.csr_matrix((vals, (rows, cols)), shape=(2 * n_nodes, dim))

    diff = sparse.diags([-np.ones(n_seg), np.ones(n_seg)], [0, 1], shape=(n_seg, n_nodes))
    diff2 = sparse.kron(diff, sparse.identity(2)).tocsr() @ embed
    hess_kin = (mu / dt) * (diff2.T @ diff2)

    def fun(v):
        r = (embed @ v).reshape(n_nodes, 2)
        d = np.diff(r, axis=0)
        kin = 0.5 * mu * np.sum(d * d) / dt
        val, g0, g1_ = segment_integrals_grad(r[:-1], r[1:])
        f = kin + alpha * dt * math.fsum(val)
        g = np.zeros_like(r)
        g[:-1] -= mu * d / dt
        g[1:] += mu * d / dt
        g[:-1] += alpha * dt * g0
        g[1:] += alpha * dt * g1_
        if not np.isfinite(f):
            return math.inf, None
        return f, embed.T @ g.ravel()

    # start from a perturbed circular arc at twice the optimal radius
    rng = np.random.default_rng(seed)
    radius = 2.0 * _cbrt(alpha * T**2 / (mu * theta**2))
    ang = np.linspace(0.0, theta, n_nodes)
    arc = radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    arc[1:-1] *= 1.0 + 0.1 * rng.uniform(-1, 1, size=(n_nodes - 2, 1))
    v0 = np.concatenate([[radius], arc[1:-1].ravel(), [radius]])
    lower = np.full(dim, -np.inf)
    lower[0] = lower[-1] = 0.0
    res = minimize_bounded(fun, v0, lower=lower, precond=hess_kin, grad_tol=1e-10, max_iters=max_iters)
    nodes = (embed @ res.x).reshape(n_nodes, 2)
    return res.fun, nodes, res
