import numpy as np
import pytest


MP = np.array([[1.0, -1.0], [-1.0, 1.0]])
B = np.array([[1.0, -1.0], [1.0, -1.0]])


def grid_minmax_2x2(S, step=1e-3):
    """Brute-force min over p of max over q of x(p)' S y(q) on a grid."""
    g = np.arange(0.0, 1.0 + step / 2, step)
    X = np.stack([g, 1 - g], axis=1)
    Y = X
    vals = X @ S @ Y.T          # rows: x grid, cols: y grid
    return float(vals.max(axis=1).min())


def random_simplex(rng, d, floor=0.0):
    w = rng.dirichlet(np.ones(d))
    return floor + (1 - floor * d) * w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
