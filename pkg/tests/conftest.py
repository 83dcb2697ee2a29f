import numpy as np
import pytest

from settomo.grids import Field1D, Field2D, make_grid
from settomo.jsa import gaussian_jsa, normalize
from settomo.signals import SeedProfile


@pytest.fixture(scope="session")
def gauss128():
    """Unchirped double Gaussian, sigma_minus = 3 sigma_plus, 128^2 over 8 sigma_minus."""
    grid = make_grid(0.0, 24.0, 128)
    return gaussian_jsa(1.0, 3.0, 0.0, grid, grid)


@pytest.fixture(scope="session")
def chirped64():
    """Chirped double Gaussian on a 64^2 grid (the reconstruction fixture)."""
    grid = make_grid(0.0, 24.0, 64)
    return gaussian_jsa(1.0, 3.0, 0.5, grid, grid)


def random_instance(seed, n=6, center=0.0, span=4.0):
    """Normalized random complex kernel plus a random seed profile."""
    rng = np.random.default_rng(seed)
    grid = make_grid(center, span, n)
    vals = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    ja = normalize(Field2D(grid_s=grid, grid_i=grid, values=vals))
    alpha = rng.normal(size=n) + 1j * rng.normal(size=n)
    seed_profile = SeedProfile(alpha=Field1D(grid=grid, values=alpha))
    return ja, seed_profile
