import sys

import numpy as np
import pytest

from confspace import ContinuousSpace, ExactSpace


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def ab():
    return ExactSpace(("a", "b"), (0.5, 0.25))


@pytest.fixture
def six(rng):
    return ExactSpace.random(6, rng)


@pytest.fixture
def unit_interval():
    return ContinuousSpace([0.0], [1.0])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
