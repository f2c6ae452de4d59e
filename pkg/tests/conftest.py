import numpy as np
import pytest


@pytest.fixture
def gen():
    return np.random.Generator(np.random.Philox(20240611))


def three_sigma(p: float, n: int) -> float:
    """Three standard errors of a Bernoulli frequency."""
    return 3.0 * np.sqrt(p * (1 - p) / n)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
