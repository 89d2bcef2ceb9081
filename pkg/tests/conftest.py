import math

import pytest

from vlinetomo import Scene, default_full_spec, make_phantom

ACCEPTANCE_LINES = []


def record(line):
    """Collect an acceptance PASS/FAIL line for the terminal summary."""
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def scene():
    return Scene(1.0, math.pi / 3)


@pytest.fixture(scope="session")
def bump2(scene):
    return make_phantom(default_full_spec(2, scene.R, scene.theta))


@pytest.fixture(scope="session")
def bump1(scene):
    return make_phantom(default_full_spec(1, scene.R, scene.theta))
