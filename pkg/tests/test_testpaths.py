import csv
import math

import numpy as np
import pytest

from ddorbits import DomainError
from ddorbits.action import DiscretePath, check_collisions, path_action
from ddorbits.geometry import BoundarySet, membership
from ddorbits.kepler import g1
from ddorbits.testpaths import (
    build_test_path,
    builtin_tables,
    certify,
    table_for,
    test_action as a_test,
    grid_actions,
)

ANCHORS = [0.004, 0.018, 0.03, 0.05, 0.08, 0.105, 0.125, 1 / 7]


def test_eight_tables_cover_the_range_contiguously():
    tables = builtin_tables()
    assert len(tables) == 8
    assert tables[0].interval[0] == 0.0 and tables[0].lower_open
    for left, right in zip(tables, tables[1:]):
        assert left.interval[1] == right.interval[0]
    assert tables[-1].interval[1] == pytest.approx(0.143 * math.pi)
    assert tables[-1].interval[1] > math.pi / 7
    for t, anchor in zip(tables, ANCHORS):
        assert t.theta0 == pytest.approx(anchor * math.pi, rel=1e-15)
        assert t.interval[0] <= t.theta0 <= t.interval[1]


def test_printed_values_survive_transcription():
    tables = builtin_tables()
    assert tables[0].nodes[1, 0].tolist() == [-15.146042, -0.091279146]
    assert tables[3].nodes[10, 0, 1] == -0.43956085
    assert tables[4].nodes[9, 1, 1] == -0.022233220
    assert tables[7].nodes[0].tolist() == [[-1.7349, 0.0], [-0.9955, 0.0]]


def test_shared_endpoint_goes_to_lower_table():
    tables = builtin_tables()
    assert table_for(0.008 * math.pi) is tables[0]
    assert table_for(0.0081 * math.pi) is tables[1]
    assert table_for(0.143 * math.pi) is tables[7]


def test_outside_the_tables():
    for theta in (0.0, -0.1, 0.1431 * math.pi):
        with pytest.raises(DomainError):
            build_test_path(theta)


@pytest.mark.parametrize("anchor", ANCHORS)
def test_built_paths_hit_the_boundary_sets(anchor):
    theta = anchor * math.pi
    path = build_test_path(theta)
    assert membership(path.nodes[0], BoundarySet.V0, 1e-12)[0]
    ok, (b1, b2) = membership(path.nodes[-1], BoundarySet.V1, 1e-12, theta=theta)
    assert ok and b1 > 0 and b2 > 0
    assert check_collisions(path.nodes) > 1e-6


def test_rows_before_the_end_do_not_depend_on_theta():
    lo, hi = builtin_tables()[3].interval
    a, b = build_test_path(lo + 1e-9), build_test_path(hi)
    assert np.array_equal(a.nodes[:10], b.nodes[:10])
    assert not np.allclose(a.nodes[10], b.nodes[10])


@pytest.mark.parametrize("anchor", ANCHORS)
def test_anchor_actions_below_g1(anchor):
    theta = anchor * math.pi
    assert a_test(theta).total < g1(theta)


def test_vectorized_grid_agrees_with_scalar_action():
    table = builtin_tables()[5]
    # interior points only: a shared endpoint belongs to the lower table
    grid = np.linspace(*table.interval, 9)[1:-1]
    actions, dmin = grid_actions(table, grid)
    for theta, value in zip(grid, actions):
        assert value == pytest.approx(a_test(theta).total, rel=1e-13)
    assert dmin > 1e-6


def test_certification_passes_with_margin(tmp_path):
    report = certify(256)
    assert report.passed and report.min_margin > 1e-3
    assert len(report.theta_grid) == 8 * 256
    assert report.theta_grid[0] > 0
    assert report.min_distance > 1e-6
    out = tmp_path / "cert.csv"
    report.to_csv(out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["theta", "a_test", "g1", "margin"]
    assert len(rows) == 8 * 256 + 1
    assert float(rows[5][3]) == pytest.approx(float(rows[5][2]) - float(rows[5][1]), rel=1e-15)


def test_lipschitz_estimates_cover_grid_gaps():
    grid = 512
    report = certify(grid)
    margins = report.g1 - report.a_test
    start = 0
    for table, (la, lg) in zip(builtin_tables(), report.lipschitz):
        width = table.interval[1] - table.interval[0]
        worst_drop = (la + lg) * width / (grid - 1)
        assert np.min(margins[start : start + grid]) - worst_drop > 0
        start += grid


def test_certify_rejects_tiny_grid():
    with pytest.raises(ValueError):
        certify(1)


def test_test_action_matches_explicit_path():
    theta = 0.12 * math.pi
    path = build_test_path(theta)
    assert a_test(theta).total == path_action(DiscretePath(path.nodes)).total
