"""Built-in test paths and the dense-grid certification of ``A(P_test) < g1``.

Each table stores the positions of q1 and q2 at ``t = j/10``.  Rows 0..9 are
used as printed.  The last row is stored unrotated as ``(-b11, -b21)`` and
``(-b11, b21)`` and is rotated by the requested angle, so a single table
serves a whole interval of angles.
"""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .action import (
    KINETIC_COEF,
    POTENTIAL_COEF,
    ActionBreakdown,
    DiscretePath,
    pair_vectors,
    path_action,
    segment_integrals,
    segment_min_distance,
)
from .errors import DomainError
from .geometry import end_config, rotate
from .kepler import g1_array

# (theta0/pi, lo/pi, hi/pi, rows) with rows "q1x q1y q2x q2y" for t = 0, 0.1, ..., 1
_RAW_TABLES = [
    ("0.004", "0", "0.008", """
        -15.1518 0 -14.2200 0
        -15.146042 -0.091279146 -14.225735 0.054329153
        -15.128907 -0.18076174 -14.242800 0.10686181
        -15.100813 -0.26669405 -14.270778 0.15584427
        -15.062445 -0.34740702 -14.308983 0.19960753
        -15.014739 -0.42135648 -14.356480 0.23660749
        -14.958863 -0.48716069 -14.412101 0.26546247
        -14.896186 -0.54363450 -14.474476 0.28498734
        -14.828251 -0.58981914 -14.542064 0.29422344
        -14.756734 -0.62500716 -14.613186 0.29246336
        -14.690399 -0.46419802 -14.690399 0.46419802
    """),
    ("0.018", "0.008", "0.028", """
        -5.8458 0 -4.9361 0
        -5.8396919 -0.10432174 -4.9420342 0.043361970
        -5.8215282 -0.20668454 -4.9596764 0.084766386
        -5.7917856 -0.30518228 -4.9885502 0.12230858
        -5.7512441 -0.39801280 -5.0278764 0.15418793
        -5.7009650 -0.48352589 -5.0765944 0.17875591
        -5.6422617 -0.56026667 -5.1333916 0.19455952
        -5.5766644 -0.62701339 -5.1967388 0.20037900
        -5.5058791 -0.68280867 -5.2649309 0.19525917
        -5.4317422 -0.72698371 -5.3361320 0.17853356
        -5.3905192 -0.45523850 -5.3905192 0.45523850
    """),
    ("0.03", "0.028", "0.034", """
        -4.2855 0 -3.3909 0
        -4.2791142 -0.11069104 -3.3969393 0.038371747
        -4.2601331 -0.21930061 -3.4148818 0.074666326
        -4.2290790 -0.32380829 -3.4442064 0.10686782
        -4.1868040 -0.42231316 -3.4840637 0.13308021
        -4.1344625 -0.51308748 -3.5333025 0.15158123
        -4.0734756 -0.59462386 -3.5905049 0.16086951
        -4.0054892 -0.66567464 -3.6540287 0.15970405
        -3.9323262 -0.72528309 -3.7220540 0.14713539
        -3.8559370 -0.77280625 -3.7926332 0.12252826
        -3.8376110 -0.44877012 -3.8376110 0.44877012
    """),
    ("0.05", "0.034", "0.065", """
        -3.1696 0 -2.3003 0
        -3.1627095 -0.11876142 -2.3064958 0.032933599
        -3.1422468 -0.23520781 -2.3248765 0.063565376
        -3.1088297 -0.34710502 -2.3548308 0.089675244
        -3.0634571 -0.45237514 -2.3953692 0.10920087
        -3.0074674 -0.54916175 -2.4451653 0.12030341
        -2.9424861 -0.63588248 -2.5026068 0.12142021
        -2.8703679 -0.71126796 -2.5658520 0.11130378
        -2.7931366 -0.77438823 -2.6328896 0.089047953
        -2.7129249 -0.82466824 -2.7015971 0.054103098
        -2.7343443 -4.3956085e-01 -2.7343443 0.43956085
    """),
    ("0.08", "0.065", "0.09", """
        -2.4188 0 -1.5888 0
        -2.4110407 -0.12842593 -1.5952285 0.028061987
        -2.3880438 -0.25409459 -1.6142407 0.053403695
        -2.3506306 -0.37438071 -1.6450374 0.073439868
        -2.3001048 -0.48690627 -1.6863483 0.085837874
        -2.2381675 -0.58962746 -1.7365132 0.088605895
        -2.1668220 -0.68088937 -1.7935727 0.080147754
        -2.0882795 -0.75945148 -1.8553595 0.059287837
        -2.0048754 -0.82449143 -1.9195791 0.025273911
        -1.9189986 -0.87559567 -1.9838788 -0.022233220
        -2.0024358 -0.42821223 -2.0024358 0.42821223
    """),
    ("0.105", "0.09", "0.115", """
        -2.0714 0 -1.2762 0
        -2.0627869 -0.13555195 -1.2828633 0.025872842
        -2.0373204 -0.26785892 -1.3024968 0.048567515
        -1.9960769 -0.39388341 -1.3340701 0.065120003
        -1.9407255 -0.51096381 -1.3759829 0.072953603
        -1.8733764 -0.61692062 -1.4262070 0.069986974
        -1.7964262 -0.71009881 -1.4824331 0.054675903
        -1.7124226 -0.78936084 -1.5421998 0.026004440
        -1.6239615 -0.85405132 -1.6029917 -0.016552740
        -1.5336164 -0.90395216 -1.6623084 -0.073077108
        -1.6702821 -0.42090108 -1.6702821 0.42090108
    """),
    ("0.125", "0.115", "0.131", """
        -1.8747 0 -1.1084 0
        -1.8653084 -0.14102665 -1.1152970 0.025082411
        -1.8376112 -0.27831768 -1.1355368 0.046526278
        -1.7929705 -0.40844171 -1.1678315 0.061008716
        -1.7334462 -0.52850073 -1.2102297 0.065759036
        -1.6615594 -0.63624643 -1.2603383 0.058677054
        -1.5800686 -0.73009218 -1.3155326 0.038342913
        -1.4917988 -0.80905691 -1.3731187 0.0039570466
        -1.3995301 -0.87268087 -1.4304397 -0.044747959
        -1.3059394 -0.92094300 -1.4849323 -0.10759299
        -1.4863528 -0.41714747 -1.4863528 0.41714747
    """),
    ("1/7", "0.131", "0.143", """
        -1.7349 0 -0.9955 0
        -1.7247204 -0.14586180 -1.0026649 0.025062574
        -1.6947882 -0.28744790 -1.0235916 0.045977949
        -1.6468072 -0.42091637 -1.0566833 0.059050379
        -1.5832849 -0.54315955 -1.0995868 0.061346424
        -1.5071821 -0.65191650 -1.1495198 0.050808846
        -1.4216133 -0.74573079 -1.2035518 0.026209663
        -1.3296454 -0.82382617 -1.2587950 -0.012980827
        -1.2341931 -0.88596482 -1.3125040 -0.066741588
        -1.1379838 -0.93232697 -1.3621100 -0.13462543
        -1.3582328 -0.41523306 -1.3582328 0.41523306
    """),
]


def _pi_multiple(text):
    num, _, den = text.partition("/")
    value = float(num) if not den else float(num) / float(den)
    return value * math.pi


@dataclass(frozen=True)
class TestPathTable:
    __test__ = False  # not a pytest class

    theta0: float
    interval: Tuple[float, float]
    nodes: np.ndarray  # (11, 2, 2); the t=1 row is unrotated
    endpoint_radii: Tuple[float, float]
    lower_open: bool = False

    def contains(self, theta):
        lo, hi = self.interval
        above = theta > lo if self.lower_open else theta >= lo
        return above and theta <= hi


@lru_cache(maxsize=None)
def _tables():
    out = []
    for k, (t0, lo, hi, rows) in enumerate(_RAW_TABLES):
        data = np.array([[float(tok) for tok in line.split()] for line in rows.strip().splitlines()])
        nodes = data.reshape(11, 2, 2)
        nodes.setflags(write=False)
        b11, b21 = -nodes[10, 0, 0], nodes[10, 1, 1]
        out.append(
            TestPathTable(
                theta0=_pi_multiple(t0),
                interval=(_pi_multiple(lo), _pi_multiple(hi)),
                nodes=nodes,
                endpoint_radii=(b11, b21),
                lower_open=(k == 0),
            )
        )
    return tuple(out)


def builtin_tables() -> List[TestPathTable]:
    return list(_tables())


def table_for(theta) -> TestPathTable:
    """First table whose interval contains ``theta`` (shared endpoints go to the lower table)."""
    for table in _tables():
        if table.contains(theta):
            return table
    lo, hi = _tables()[0].interval[0], _tables()[-1].interval[1]
    raise DomainError(f"theta={theta} lies outside ({lo}, {hi}] covered by the test paths")


def build_test_path(theta) -> DiscretePath:
    table = table_for(theta)
    nodes = np.array(table.nodes)
    b11, b21 = table.endpoint_radii
    nodes[10] = end_config(b11, b21, theta)
    return DiscretePath(nodes)


def test_action(theta) -> ActionBreakdown:
    return path_action(build_test_path(theta))


test_action.__test__ = False


@dataclass(frozen=True)
class CertReport:
    theta_grid: np.ndarray
    a_test: np.ndarray
    g1: np.ndarray
    min_margin: float
    argmin_theta: float
    lipschitz: Tuple[Tuple[float, float], ...] = ()
    min_distance: float = math.nan

    @property
    def passed(self):
        return self.min_margin > 0

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theta", "a_test", "g1", "margin"])
            for t, a, g in zip(self.theta_grid, self.a_test, self.g1):
                writer.writerow([f"{t:.17g}", f"{a:.17g}", f"{g:.17g}", f"{g - a:.17g}"])


def _interval_grid(table, grid):
    lo, hi = table.interval
    if table.lower_open:
        return np.linspace(lo, hi, grid + 1)[1:]
    return np.linspace(lo, hi, grid)


def grid_actions(table: TestPathTable, thetas):
    """Vectorized test-path action for many angles sharing one table.

    Only the last segment depends on the angle, so the first nine segment
    actions are computed once.  Returns ``(actions, min_pair_distance)``.
    """
    thetas = np.asarray(thetas, dtype=float)
    fixed = path_action(DiscretePath(table.nodes[:10], 0.0, 0.9)).total
    b11, b21 = table.endpoint_radii
    last = rotate(np.array([[-b11, -b21], [-b11, b21]]), thetas[:, None])
    p0 = pair_vectors(table.nodes[9])[None].repeat(len(thetas), axis=0)
    p1 = pair_vectors(last)
    dt = 0.1
    diff = p1 - p0
    kin = np.einsum("tkx,tkx->tk", diff, diff) @ KINETIC_COEF / dt
    pot = segment_integrals(p0, p1) @ POTENTIAL_COEF * dt
    dist = segment_min_distance(p0, p1).min()
    return fixed + kin + pot, float(dist)


def certify(grid_per_interval=4096) -> CertReport:
    """Compare the test-path action with ``g1`` on a uniform grid of every interval.

    Besides the margins the report carries, per interval, the largest
    finite-difference slopes of ``A_test`` and ``g1`` on the grid, which bound
    how much the margin can drop between neighbouring samples.
    """
    if grid_per_interval < 2:
        raise ValueError("grid_per_interval must be at least 2")
    thetas, actions, bounds, slopes, dists = [], [], [], [], []
    for table in _tables():
        grid = _interval_grid(table, grid_per_interval)
        a, dmin = grid_actions(table, grid)
        g = g1_array(grid)
        thetas.append(grid)
        actions.append(a)
        bounds.append(g)
        dists.append(dmin)
        h = np.diff(grid)
        slopes.append((float(np.max(np.abs(np.diff(a) / h))), float(np.max(np.abs(np.diff(g) / h)))))
    theta = np.concatenate(thetas)
    a_test = np.concatenate(actions)
    g = np.concatenate(bounds)
    margin = g - a_test
    k = int(np.argmin(margin))
    return CertReport(
        theta_grid=theta,
        a_test=a_test,
        g1=g,
        min_margin=float(margin[k]),
        argmin_theta=float(theta[k]),
        lipschitz=tuple(slopes),
        min_distance=min(dists),
    )
