import numpy as np
import pytest

from polaron.grid import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid1d():
    return make_grid(64, 20.0, 1)


@pytest.fixture(scope="session")
def grid3d():
    return make_grid(16, 8.0, 3)


def gaussian(grid, width=1.0, center=0.0):
    """Normalized real Gaussian on ``grid``."""
    r2 = sum((xi - center) ** 2 for xi in grid.x)
    psi = np.exp(-r2 / (2 * width**2)).astype(complex)
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dv)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number, name, passed, detail):
    """Print and remember one pass/fail line for an acceptance criterion."""
    line = f"ACCEPTANCE {number:>3} {name}: {'PASS' if passed else 'FAIL'} | {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
