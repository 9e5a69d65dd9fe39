import math

import numpy as np
import pytest
from scipy import sparse

from ddorbits.optim import minimize_bounded


def quadratic(a, b):
    def fun(x):
        return 0.5 * x @ a @ x - b @ x, a @ x - b

    return fun


def test_unconstrained_quadratic():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(8, 8))
    a = m @ m.T + 8 * np.eye(8)
    b = rng.normal(size=8)
    res = minimize_bounded(quadratic(a, b), np.zeros(8), grad_tol=1e-10)
    assert res.converged
    assert np.allclose(res.x, np.linalg.solve(a, b), atol=1e-9)


def test_exact_preconditioner_converges_in_one_step():
    a = np.diag([1.0, 100.0, 1e4])
    b = np.array([1.0, 2.0, 3.0])
    res = minimize_bounded(quadratic(a, b), np.zeros(3), precond=sparse.csr_matrix(a), grad_tol=1e-10)
    assert res.converged and res.iterations <= 2


def test_active_lower_bound():
    # minimum of (x - (-1))^2 + (y - 2)^2 on x >= 0 is (0, 2)
    def fun(x):
        return (x[0] + 1) ** 2 + (x[1] - 2) ** 2, np.array([2 * (x[0] + 1), 2 * (x[1] - 2)])

    res = minimize_bounded(fun, np.array([3.0, 0.0]), lower=np.array([0.0, -np.inf]), grad_tol=1e-10)
    assert res.converged
    assert np.allclose(res.x, [0.0, 2.0], atol=1e-9)


def test_infeasible_trials_are_rejected():
    # log barrier at x = 0: a full Newton-like step from x = 1 would jump past it
    def fun(x):
        if x[0] <= 0:
            return math.inf, None
        return x[0] - math.log(x[0]) + 10 * x[0] ** 2, np.array([1 - 1 / x[0] + 20 * x[0]])

    res = minimize_bounded(fun, np.array([5.0]), grad_tol=1e-12)
    assert res.converged
    expected = (-1 + math.sqrt(1 + 80)) / 40
    assert res.x[0] == pytest.approx(expected, rel=1e-9)


def test_history_is_monotone_on_rosenbrock():
    def fun(x):
        f = (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
        g = np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])
        return f, g

    res = minimize_bounded(fun, np.array([-1.2, 1.0]), grad_tol=1e-9)
    assert res.converged
    assert np.allclose(res.x, [1, 1], atol=1e-6)
    assert np.all(np.diff(res.history) <= 0)


def test_infeasible_start_is_an_error():
    with pytest.raises(ValueError):
        minimize_bounded(lambda x: (math.inf, None), np.zeros(2))
