import numpy as np
import pytest

from wbnd import HmmParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_params(rng, sigma_range=(0.3, 3.0), phi_range=(0.5, 10.0)) -> HmmParams:
    """A random valid parameter set (rows normalized, scales positive)."""
    pi = rng.dirichlet([1.0, 1.0])
    a = np.vstack([rng.dirichlet([1.0, 1.0]), rng.dirichlet([1.0, 1.0])])
    sigma = rng.uniform(*sigma_range)
    phi = rng.uniform(*phi_range)
    return HmmParams(pi=pi, a=a, sigma=sigma, phi=phi)


def square_image(size: int = 64, lo: int = 16, hi: int = 48, contrast: float = 255.0):
    """White square on black background plus its boundary-pixel ground truth."""
    img = np.zeros((size, size))
    img[lo:hi, lo:hi] = contrast
    inside = np.zeros((size, size), dtype=bool)
    inside[lo:hi, lo:hi] = True
    interior = np.zeros_like(inside)
    interior[lo + 1 : hi - 1, lo + 1 : hi - 1] = True
    return img, inside & ~interior
