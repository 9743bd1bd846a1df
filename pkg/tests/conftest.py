import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(rng, n, count=100, radius=2.0, t_span=(0.0, 3.0)):
    ts = rng.uniform(*t_span, size=count)
    xs = rng.uniform(-radius, radius, size=(count, n))
    return list(zip(ts, xs))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
