import numpy as np
import pytest

from spinvqe.statevector import StateVector


def kron_op(ops: dict, n: int) -> np.ndarray:
    """Full 2^n matrix with ``ops[q]`` on qubit q (bit q of the index)."""
    mat = np.eye(1, dtype=complex)
    for q in reversed(range(n)):
        mat = np.kron(mat, ops.get(q, np.eye(2)))
    return mat


def random_state(n: int, seed: int) -> StateVector:
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
