import numpy as np
import pytest
from scipy.linalg import expm

from illumination.gaussian_core import symplectic_form

SEED = 20240229


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def random_symplectic(rng):
    """Factory for random symplectic matrices ``exp(Ω H)`` with small symmetric ``H``."""

    def make(n_modes, scale=0.4):
        h = rng.normal(size=(2 * n_modes, 2 * n_modes))
        h = scale * (h + h.T) / 2.0
        return expm(symplectic_form(n_modes) @ h)

    return make
