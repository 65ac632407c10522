import numpy as np
import pytest

from csil.rng import substream


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng(request):
    return substream(12345, request.node.name)


def rejection_l1_ball(rng, n, d, radius=1.0):
    """Independent oracle: uniform cube draws kept when inside the l1 ball."""
    out = []
    while sum(len(o) for o in out) < n:
        cube = rng.uniform(-radius, radius, size=(4 * n, d))
        out.append(cube[np.abs(cube).sum(axis=1) <= radius])
    return np.concatenate(out)[:n]


def weighted_ball_grid(radius, step=1e-3):
    """Every point of the step grid inside ``|b1| + 2|b2| <= radius``.

    Rows are built per b2 value so the ball's edges are hit exactly.
    """
    m = int(np.floor(radius / (2 * step) + 1e-9))
    b2 = np.arange(-m, m + 1) * step
    out = []
    for v in b2:
        k = int(np.floor((radius - 2 * abs(v)) / step + 1e-9))
        b1 = np.arange(-k, k + 1) * step
        out.append(np.column_stack([b1, np.full(len(b1), v)]))
    return np.concatenate(out)


def brute_force_link(design, y, loss, grid, chunk=200_000):
    """Independent oracle: smallest empirical loss over a dense grid."""
    best = np.inf
    for s in range(0, len(grid), chunk):
        vals = np.mean(loss(grid[s:s + chunk] @ design.T, y), axis=1)
        best = min(best, float(vals.min()))
    return best
