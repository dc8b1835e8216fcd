import numpy as np
import pytest

from taylorsim import ProblemInstance, pauli_instance

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def random_hermitian(rng, dim):
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (M + M.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def xz():
    """H = (X + Z)/2: A = 1, so t = 1 gives T = 1."""
    return pauli_instance(1, [(0.5, "X"), (0.5, "Z")])


@pytest.fixture
def xz_instance(xz):
    return ProblemInstance(xz, t=1.0, epsilon=1e-8, delta=0.49)
