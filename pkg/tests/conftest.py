import numpy as np
import pytest

from framefree.tensor import QuditLayout, StateVector


def random_state(n_sites: int, rng, local_dim: int = 2) -> StateVector:
    layout = QuditLayout(n_sites, local_dim, 1)
    amps = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return StateVector(layout, amps / np.linalg.norm(amps))


def random_hermitian(dim: int, rng) -> np.ndarray:
    mat = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (mat + mat.conj().T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
