import numpy as np
import pytest

from lmflow.potential import cahn_hilliard
from lmflow.spectral import make_grid

_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Record ``(criterion, passed, detail)`` lines shown in the terminal summary."""

    def log(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def grid():
    return make_grid(32, 32)


@pytest.fixture
def flow():
    return cahn_hilliard(0.06)


def smooth_field(grid, rng, nmodes=4, mean=0.0, amp=0.3):
    """Random combination of a few low Fourier modes."""
    X, Y = grid.coords()
    phi = np.full(grid.shape, float(mean))
    for _ in range(nmodes):
        mx, my = rng.integers(-3, 4, size=2)
        a, ph = rng.uniform(-1, 1), rng.uniform(0, 2 * np.pi)
        phi += amp * a * np.cos(2 * np.pi * (mx * X / grid.lx + my * Y / grid.ly) + ph)
    return phi
