import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qacal.qubo import QuboProblem, generate_clique_problem, with_ground_energy  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def q4():
    return with_ground_energy(generate_clique_problem(4, "uniform", seed=4))


@pytest.fixture(scope="session")
def q8():
    return with_ground_energy(generate_clique_problem(8, "uniform", seed=1))


def random_problem(rng, dim):
    """Random upper-triangular problem (not normalized)."""
    return QuboProblem(np.triu(rng.uniform(-1, 1, size=(dim, dim))))


# -- acceptance verdicts -------------------------------------------------------------

_VERDICTS = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    lines = [v for k, v in report.user_properties if k == "verdict"]
    if report.when == "call":
        _VERDICTS.extend(lines or [f"FAIL {report.nodeid.split('::')[-1]}: raised before a verdict"])
    elif report.failed:
        _VERDICTS.append(f"FAIL {report.nodeid.split('::')[-1]}: error during {report.when}")


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
