import math

import pytest

from nopoblockade import ModeCutoffs, SystemParams, build_space

G = 10.0


@pytest.fixture(scope="session")
def reference_point():
    """g = 10 kappa_a, kappa = kappa_a/2, delta_a = sqrt(3) g on the optimal curve, E = 0.01."""
    return SystemParams.on_optimal_curve(math.sqrt(3) * G, g=G, kappa=0.5, E=0.01)


@pytest.fixture(scope="session")
def default_space():
    return build_space(ModeCutoffs(3, 4, 4))


@pytest.fixture
def tiny_space():
    return build_space((1, 1, 1))


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
