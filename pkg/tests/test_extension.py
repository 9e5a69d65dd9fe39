import csv
import math

import numpy as np
import pytest

from ddorbits import ConstraintError
from ddorbits.action import DiscretePath, path_action
from ddorbits.extension import (
    detect_closure,
    extend_full,
    junction_c1_check,
    max_speed,
    one_sided_velocity,
    reflect_t0,
    reflect_t1,
)
from ddorbits.geometry import B, end_config, full_config, rotate, rotation_matrix
from ddorbits.testpaths import build_test_path

THETA = 0.05 * math.pi


def swap(q):
    return q[..., ::-1, :]


def test_reflect_t0_is_even_in_x_odd_in_y():
    path = build_test_path(THETA)
    ext = reflect_t0(path)
    n = path.n_segments
    assert ext.n_segments == 2 * n and ext.t_start == -1.0 and ext.t_end == 1.0
    for j in range(n + 1):
        assert np.array_equal(ext.nodes[n - j], path.nodes[j] @ B)
    assert np.array_equal(ext.nodes[n], path.nodes[0])


def test_reflect_t1_formula_and_fixed_point():
    path = build_test_path(THETA)
    ext = reflect_t1(path, THETA)
    n = path.n_segments
    assert ext.n_segments == 2 * n and ext.t_end == 2.0
    rb = B @ rotation_matrix(2 * THETA)
    for j in range(n + 1):
        assert np.allclose(ext.nodes[2 * n - j], swap(path.nodes[j]) @ rb, atol=1e-14)
    # the end rectangle is fixed by swap followed by the reflection across the theta line
    end = end_config(2.3, 0.7, THETA)
    assert np.allclose(swap(end) @ rb, end, atol=1e-14)


def test_reflect_t1_at_zero_angle_is_plain_reflection():
    t = np.linspace(0, 1, 11)[:, None, None]
    nodes = (1 - t) * np.array([[-3.0, 0.0], [-1.0, 0.0]]) + t * end_config(2.0, 0.5, 0.0)
    ext = reflect_t1(DiscretePath(nodes), 0.0)
    assert np.allclose(ext.nodes[15], swap(nodes[5]) * [1, -1])


def test_boundary_membership_is_checked():
    path = build_test_path(THETA)
    bad = np.array(path.nodes)
    bad[0, 0, 1] = 0.1
    with pytest.raises(ConstraintError):
        reflect_t0(DiscretePath(bad))
    with pytest.raises(ConstraintError):
        reflect_t1(path, THETA + 0.1)


def test_printed_second_block_equals_two_reflections():
    path = build_test_path(THETA)
    orbit = extend_full(path, THETA, 1)
    composed = reflect_t1(reflect_t0(path), THETA)  # on [-1, 3]
    n = path.n_segments
    assert np.allclose(orbit.block(2, 3), composed.nodes[3 * n :], atol=1e-13)
    assert np.allclose(orbit.block(2, 4), rotate(swap(orbit.block(0, 2)), 2 * THETA), atol=1e-13)


@pytest.mark.parametrize("theta", [0.004 * math.pi, THETA, math.pi / 7])
def test_construction_identities(theta):
    path = build_test_path(theta)
    orbit = extend_full(path, theta, 4)
    n, q = path.n_segments, orbit.nodes
    assert q.shape == (16 * n + 1, 2, 2)
    assert np.max(np.abs(q[4 * n :] - rotate(q[: -4 * n], 4 * theta))) <= 1e-12
    full = full_config(q)
    assert np.array_equal(full[:, 0], -full[:, 3]) and np.array_equal(full[:, 1], -full[:, 2])
    unit = path_action(path).total
    assert path_action(DiscretePath(orbit.block(0, 2), 0, 2)).total == pytest.approx(2 * unit, abs=1e-10)
    assert path_action(DiscretePath(orbit.block(0, 4), 0, 4)).total == pytest.approx(4 * unit, abs=1e-10)


def test_closure_detection():
    assert detect_closure(math.pi / 7) == (True, 28, 7, 1)
    assert detect_closure(math.pi / 10).period == 40
    assert not detect_closure(0.004 * math.pi).periodic
    assert not detect_closure(math.pi / math.sqrt(2) / 10).periodic
    assert not detect_closure(0.1234567).periodic
    assert detect_closure(0.004 * math.pi, denom_max=250).period == 1000
    with pytest.raises(ValueError):
        detect_closure(1.0, denom_max=0)


def test_one_sided_velocity_exact_on_quartics():
    t = np.linspace(0, 1, 21)
    f = 3 * t**4 - t**3 + 2 * t - 5
    h = t[1]
    assert one_sided_velocity(f, h) == pytest.approx(2.0, abs=1e-10)
    assert one_sided_velocity(f, h, at_end=True) == pytest.approx(12 - 3 + 2, abs=1e-9)


def test_junctions_smooth_for_minimizer_not_for_test_path(solved):
    sol = solved(THETA, 320)
    orbit = extend_full(sol.path, THETA, 1)
    jumps = junction_c1_check(orbit)
    assert len(jumps) == 4
    assert max(jumps) <= 1e-2 * max_speed(orbit.nodes, orbit.dt)
    rough = extend_full(build_test_path(THETA).resampled(320), THETA, 1)
    assert max(junction_c1_check(rough)) > 1e-2 * max_speed(rough.nodes, rough.dt)


def test_csv_export(tmp_path):
    orbit = extend_full(build_test_path(THETA), THETA, 2)
    out = tmp_path / "orbit.csv"
    orbit.to_csv(out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "q1x", "q1y", "q2x", "q2y", "q3x", "q3y", "q4x", "q4y"]
    assert len(rows) == 8 * 10 + 2
    assert float(rows[-1][0]) == 8.0
    assert np.array_equal(np.array(rows[7][1:], float), full_config(orbit.nodes[6]).ravel())
    assert b"\r" not in out.read_bytes()
