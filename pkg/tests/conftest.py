import numpy as np
import pytest

from ac2d.linalg import gqr
from ac2d.mesh import build_tensor_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def unit_grid():
    """k=1 grid on the unit square, 9x9 nodes."""
    return build_tensor_grid(1, 8, 8, (0.0, 1.0, 0.0, 1.0))


@pytest.fixture
def mixed_grid():
    """k=2 grid with unequal directions on a shifted rectangle."""
    return build_tensor_grid(2, 6, 4, (-1.0, 1.0, 0.0, 3.0))


def random_low_rank(grids, rank, rng, scale=1.0):
    """Random factored state with exactly mass-orthonormal bases."""
    m, n = grids.shape
    u, _ = gqr(rng.standard_normal((m, rank)), grids.gx.mass_diag)
    v, _ = gqr(rng.standard_normal((n, rank)), grids.gy.mass_diag)
    s = scale * rng.standard_normal((rank, rank))
    return u, s, v


def weighted_inner_oracle(a, b, gx, gy):
    """Direct double sum, kept independent of the library implementation."""
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += gx.mass_diag[i] * a[i, j] * gy.mass_diag[j] * b[i, j]
    return total
