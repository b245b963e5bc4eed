import numpy as np
import pytest

# Local single-qubit matrices: tests build their own expected values with
# these rather than through the code under test.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SINGLE_PAULIS = (I2, X, Y, Z)


def kron_chain(*matrices):
    out = matrices[0]
    for m in matrices[1:]:
        out = np.kron(out, m)
    return out


def word_matrix(word):
    return kron_chain(*(SINGLE_PAULIS[i] for i in word))


def random_hermitian(dim, rng, scale=1.0):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (m + m.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
