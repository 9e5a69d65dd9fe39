"""Independent reference computations used only by the tests.

Nothing here imports the package: integrals come from mpmath or a plain
adaptive Simpson rule, rotations from complex multiplication and the
potential from an explicit sum over the six pairs of the four bodies.
"""

import cmath
import math

import mpmath
import numpy as np

mpmath.mp.dps = 40


def adaptive_simpson(f, a, b, tol=1e-13, max_depth=60):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def inverse_distance_integral(a, b, c, d):
    """int_0^1 du / |(a + b u, c + d u)| to 40 digits."""
    a, b, c, d = (mpmath.mpf(x) for x in (a, b, c, d))
    # split at the closest approach so a sharp peak is not missed
    closest = -(a * b + c * d) / (b * b + d * d)
    points = [0, closest, 1] if 0 < closest < 1 else [0, 1]
    return float(mpmath.quad(lambda u: 1 / mpmath.sqrt((a + b * u) ** 2 + (c + d * u) ** 2), points))


def rotate_complex(v, theta):
    z = complex(v[0], v[1]) * cmath.exp(1j * theta)
    return np.array([z.real, z.imag])


def full_bodies(config):
    q1, q2 = np.asarray(config[0], float), np.asarray(config[1], float)
    return [q1, q2, -q2, -q1]


def four_body_potential(config):
    bodies = full_bodies(config)
    return sum(1.0 / np.linalg.norm(bodies[i] - bodies[j]) for i in range(4) for j in range(i + 1, 4))


def path_action_quadrature(nodes, t_end=1.0):
    """Kinetic part exactly, potential by mpmath quadrature on each segment."""
    nodes = np.asarray(nodes, float)
    n = len(nodes) - 1
    dt = t_end / n
    kinetic = sum(float(np.sum((nodes[j + 1] - nodes[j]) ** 2)) for j in range(n)) / dt
    potential = mpmath.mpf(0)
    for j in range(n):
        p0 = [mpmath.matrix(nodes[j][k].tolist()) for k in range(2)]
        p1 = [mpmath.matrix(nodes[j + 1][k].tolist()) for k in range(2)]

        def u_at(u, p0=p0, p1=p1):
            q1 = p0[0] + (p1[0] - p0[0]) * u
            q2 = p0[1] + (p1[1] - p0[1]) * u
            return 2 / mpmath.norm(q1 - q2) + 2 / mpmath.norm(q1 + q2) + 1 / (2 * mpmath.norm(q1)) + 1 / (2 * mpmath.norm(q2))

        potential += mpmath.quad(u_at, [0, 1]) * dt
    return kinetic + float(potential)


def kepler_closed_form(mu, alpha, T, theta):
    mu, alpha, T, theta = (mpmath.mpf(x) for x in (mu, alpha, T, theta))
    return float(mpmath.mpf(3) / 2 * mpmath.cbrt(mu * alpha**2 * theta**2 * T))


def central_difference_gradient(f, x, h=1e-6):
    x = np.asarray(x, float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def circular_square_path(radius, n, dt):
    """Rigid square of four unit masses rotating uniformly; returns nodes and angular step.

    The discrete step is chosen so the centred second difference of every
    node reproduces the central-force acceleration exactly.
    """
    k = (1 / math.sqrt(2) + 0.25) / radius**3
    step = math.acos(1 - k * dt * dt / 2)
    ang = step * np.arange(n + 1)
    q1 = radius * np.stack([np.cos(ang + math.pi), np.sin(ang + math.pi)], axis=1)
    q2 = radius * np.stack([np.cos(ang + math.pi / 2), np.sin(ang + math.pi / 2)], axis=1)
    return np.stack([q1, q2], axis=1), step
