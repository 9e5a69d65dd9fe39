import math

import pytest

from ddorbits.minimizer import Family, Problem, minimize


@pytest.fixture(scope="session")
def solved():
    """Cache of converged minimizers keyed by (theta, n, family)."""
    cache = {}

    def get(theta, n=160, family=Family.PROGRADE, **kw):
        key = (round(theta, 15), n, Family(family), tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = minimize(Problem(theta, n, family, **kw))
        return cache[key]

    return get


THETA_005 = 0.05 * math.pi


_CRITERIA = {}
_CRITERIA_COUNT = 10


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary and return ``passed``."""

    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, _CRITERIA_COUNT + 1):
        passed, detail = _CRITERIA.get(number, (False, "not reached"))
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
