import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tumblesim.chain_model import default_fixture
from tumblesim.validation import random_state

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixture():
    return default_fixture()


@pytest.fixture(scope="session")
def robot(fixture):
    return fixture[0]


@pytest.fixture(scope="session")
def ground(fixture):
    return fixture[1]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def states(robot, rng):
    return [random_state(robot, rng) for _ in range(20)]


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, printed in the terminal summary."""
    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
