import numpy as np
import pytest

from rdex.suite import BenchmarkFunction, SearchSpace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space10():
    return SearchSpace.box(10)


def shifted(base, d=10, seed=0, rotate=False, bias=0.0):
    from rdex.suite import random_rotation

    g = np.random.default_rng(seed)
    shift = g.uniform(-80, 80, d)
    rot = random_rotation(d, g) if rotate else None
    return BenchmarkFunction(f"{base}_{seed}", SearchSpace.box(d), base, shift, rot, bias)


# one verdict line per acceptance criterion, printed after the run
_criteria = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and name.startswith("test_criterion_"):
        if report.when == "call" or report.outcome != "passed":
            number = int(name.split("_")[2])
            _criteria[number] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number}: {_criteria[number]}")
