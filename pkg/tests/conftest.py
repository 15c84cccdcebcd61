import numpy as np
import pytest

from kdistance.convex_body import parse_body


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


@pytest.fixture
def ball2():
    return parse_body("ball", 2)


@pytest.fixture
def ellipse21():
    return parse_body("ellipsoid:2,1")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)] if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
