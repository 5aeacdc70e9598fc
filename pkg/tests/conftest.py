import pytest
from hypothesis import HealthCheck, settings, strategies as st

from msdt.dataset import DataSet
from msdt.oracle import random_instance

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# ids a..e = 0..4; blue = 1, red = 0
FIG_X = [(0, 3), (1, 2), (2, 2), (2, 1), (2, 0)]
FIG_Y = [1, 0, 1, 0, 1]

# reduction walkthrough table, ids a..d = 0..3
RED_X = [(0, 1, 0), (1, 0, 0), (2, 2, 2), (3, 2, 1)]
RED_Y = [0, 0, 1, 0]

A, B, C, D, E = range(5)


@pytest.fixture
def fig_ds():
    return DataSet(FIG_X, FIG_Y)


@pytest.fixture
def red_ds():
    return DataSet(RED_X, RED_Y)


@st.composite
def instances(draw, max_n=10, max_d=3, max_value=3):
    seed = draw(st.integers(0, 10**6))
    n = draw(st.integers(2, max_n))
    d = draw(st.integers(1, max_d))
    v = draw(st.integers(1, max_value))
    return random_instance(seed, n, d, v)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
