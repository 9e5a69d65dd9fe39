"""Preconditioned limited-memory BFGS with lower bounds and backtracking.

Variables at their lower bound whose gradient pushes further down are held
fixed; the remaining ones take an L-BFGS step whose initial inverse Hessian
is ``gamma * P^-1`` for a sparse SPD preconditioner ``P``.  A trial point
where the objective is not finite (a collision) is treated like an Armijo
failure and the step is shortened.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    message: str
    history: list = field(default_factory=list)
    rejected_steps: int = 0


class _Precond:
    def __init__(self, matrix, free):
        self.free = free
        if matrix is None:
            self._lu = None
        else:
            sub = sparse.csc_matrix(matrix)[free][:, free]
            self._lu = splu(sparse.csc_matrix(sub))

    def solve(self, v):
        if self._lu is None:
            return v.copy()
        out = np.zeros_like(v)
        out[self.free] = self._lu.solve(v[self.free])
        return out


def minimize_bounded(
    fun,
    x0,
    lower=None,
    precond=None,
    grad_tol=1e-8,
    max_iters=100000,
    memory=20,
    max_backtracks=60,
    armijo=1e-4,
    callback=None,
):
    """Minimize ``fun`` subject to ``x >= lower``.

    ``fun(x)`` returns ``(value, gradient)``; a non-finite value marks an
    infeasible point (``gradient`` may then be ``None``).
    """
    x = np.array(x0, dtype=float)
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    x = np.maximum(x, lower)
    f, g = fun(x)
    if not math.isfinite(f):
        raise ValueError("objective is not finite at the starting point")

    history = [f]
    s_list, y_list = [], []
    free = None
    pre = None
    rejected = 0
    message = "maximum iterations reached"
    converged = False
    grad_norm = math.inf
    it = 0

    for it in range(max_iters + 1):
        at_bound = x <= lower
        new_free = ~(at_bound & (g > 0))
        pg = np.where(new_free, g, 0.0)
        grad_norm = float(np.linalg.norm(pg))
        if grad_norm <= grad_tol:
            converged = True
            message = "projected gradient below tolerance"
            break
        if it == max_iters:
            break
        if free is None or np.any(new_free != free):
            free = new_free
            pre = _Precond(precond, free)
            s_list.clear()
            y_list.clear()

        d = _two_loop(pg, s_list, y_list, pre, free)
        if np.dot(d, pg) >= 0:
            s_list.clear()
            y_list.clear()
            d = -pre.solve(pg)

        step = 1.0
        if not s_list:
            # first step of a memory cycle: keep it modest
            step = min(1.0, 1.0 / max(np.max(np.abs(d)), 1e-300))
        accepted = False
        for _ in range(max_backtracks):
            x_new = np.maximum(x + step * d, lower)
            f_new, g_new = fun(x_new)
            if math.isfinite(f_new) and f_new <= f + armijo * np.dot(g, x_new - x):
                accepted = True
                break
            rejected += 1
            step *= 0.5
        if not accepted:
            if s_list:
                s_list.clear()
                y_list.clear()
                continue
            message = "line search failed"
            break

        s = x_new - x
        y = g_new - g
        sy = float(np.dot(s, y))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_list.append(s)
            y_list.append(y)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if callback is not None:
            callback(x, f)

    return OptimResult(
        x=x,
        fun=f,
        grad=g,
        grad_norm=grad_norm,
        iterations=it,
        converged=converged,
        message=message,
        history=history,
        rejected_steps=rejected,
    )


def _two_loop(pg, s_list, y_list, pre, free):
    q = pg.copy()
    alphas = []
    rhos = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        s = np.where(free, s, 0.0)
        y = np.where(free, y, 0.0)
        rho = 1.0 / np.dot(y, s)
        a = rho * np.dot(s, q)
        q -= a * y
        alphas.append(a)
        rhos.append(rho)
    r = pre.solve(q)
    if s_list:
        s, y = s_list[-1], y_list[-1]
        hy = pre.solve(np.where(free, y, 0.0))
        r *= np.dot(s, y) / np.dot(y, hy)
    for (s, y), a, rho in zip(zip(s_list, y_list), reversed(alphas), reversed(rhos)):
        s = np.where(free, s, 0.0)
        y = np.where(free, y, 0.0)
        b = rho * np.dot(y, r)
        r += s * (a - b)
    return -np.where(free, r, 0.0)
