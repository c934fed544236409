import numpy as np
import pytest

from umcf.grid import Grid


def dft_oracle(f: np.ndarray) -> np.ndarray:
    """Direct O(N^2) DFT, normalized so the zero mode is the mean."""
    c = f.astype(complex)
    for axis, n in enumerate(f.shape):
        j = np.arange(n)
        W = np.exp(-2j * np.pi * np.outer(j, j) / n) / n
        c = np.moveaxis(np.tensordot(W, np.moveaxis(c, axis, 0), axes=(1, 0)), 0, axis)
    return c


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[1, 2, 3], ids=["1d", "2d", "3d"])
def small_grid(request):
    n = {1: (16,), 2: (12, 8), 3: (8, 6, 10)}[request.param]
    length = {1: (1.0,), 2: (1.0, 2.0), 3: (1.0, 0.5, 2.0)}[request.param]
    return Grid(n, length)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
