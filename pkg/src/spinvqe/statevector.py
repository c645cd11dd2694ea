"""Dense statevector simulation for spin-1/2 chains.

Basis-state index ``k`` stores qubit ``q`` in bit ``q`` of ``k`` (little
endian), so chain site ``i`` (1-based) lives on qubit ``i - 1``.  ``|0>`` is
spin up and ``|1>`` is spin down.  Entropies are in nats; divide by ``ln 2``
for bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-6

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)


class StateInvariantError(ValueError):
    """Raised when a state violates normalization where it is required."""


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_normalized(state: StateVector) -> None:
    if abs(state.norm() - 1.0) > NORM_ATOL:
        raise StateInvariantError(f"state is not normalized (norm={state.norm():.3e})")


def _pair_view(amps: np.ndarray, n: int, lo: int, hi: int) -> np.ndarray:
    # axis 1 <-> bit hi, axis 3 <-> bit lo
    return amps.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)


def init_bell_pairs(n_qubits: int) -> StateVector:
    """Product of singlets on qubit pairs (0, 1), (2, 3), ...

    Each pair carries amplitudes ``[0, 1/sqrt2, -1/sqrt2, 0]`` over its local
    indices, i.e. ``(|01> - |10>)/sqrt2`` with the label read as a binary index.
    """
    if n_qubits < 2 or n_qubits % 2:
        raise ValueError(f"n_qubits must be even and >= 2, got {n_qubits}")
    singlet = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2)
    amps = np.ones(1, dtype=complex)
    for _ in range(n_qubits // 2):
        # new pair occupies the higher bits
        amps = np.kron(singlet, amps)
    return StateVector(n_qubits, amps)


def _check_qubits(state: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"qubit index {q} out of range for {state.n_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubit indices must be distinct, got {qubits}")


def apply_two_qubit_gate(state: StateVector, gate: np.ndarray, q_a: int, q_b: int) -> StateVector:
    """Apply a 4x4 ``gate`` to qubits ``(q_a, q_b)`` in place.

    The gate's local basis index is ``bit(q_a) + 2 * bit(q_b)``.
    """
    _check_qubits(state, q_a, q_b)
    gate = np.asarray(gate)
    if gate.shape != (4, 4):
        raise ValueError(f"two-qubit gate must be 4x4, got {gate.shape}")
    lo, hi = min(q_a, q_b), max(q_a, q_b)
    v = _pair_view(state.amplitudes, state.n_qubits, lo, hi)
    # local index j -> (bit_hi, bit_lo) slice
    slots = []
    for j in range(4):
        ba, bb = j & 1, j >> 1
        bl, bh = (ba, bb) if q_a == lo else (bb, ba)
        slots.append((bh, bl))
    old = [v[:, bh, :, bl, :].copy() for bh, bl in slots]
    for i, (bh, bl) in enumerate(slots):
        row = gate[i]
        acc = None
        for j in range(4):
            if row[j] != 0:
                term = row[j] * old[j]
                acc = term if acc is None else acc + term
        v[:, bh, :, bl, :] = 0 if acc is None else acc
    return state


def apply_single_qubit_gate(state: StateVector, gate: np.ndarray, q: int) -> StateVector:
    """Apply a 2x2 ``gate`` to qubit ``q`` in place."""
    _check_qubits(state, q)
    n = state.n_qubits
    v = state.amplitudes.reshape(1 << (n - 1 - q), 2, 1 << q)
    a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
    v[:, 0, :] = gate[0, 0] * a0 + gate[0, 1] * a1
    v[:, 1, :] = gate[1, 0] * a0 + gate[1, 1] * a1
    return state


def sample_bitstrings(state: StateVector, shots: int, seed=None) -> np.ndarray:
    """Draw ``shots`` basis-state indices i.i.d. from ``|amplitudes|**2``.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    _check_normalized(state)
    probs = state.probabilities()
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(idx, state.dim - 1)


def schmidt_values(state: StateVector, cut: int) -> np.ndarray:
    """Singular values across the bipartition qubits ``[0, cut)`` | ``[cut, N)``."""
    if not 1 <= cut <= state.n_qubits - 1:
        raise ValueError(f"cut must lie in 1..{state.n_qubits - 1}, got {cut}")
    mat = state.amplitudes.reshape(1 << (state.n_qubits - cut), 1 << cut)
    return np.linalg.svd(mat, compute_uv=False)


def subsystem_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (nats) of qubits ``0..cut-1``."""
    _check_normalized(state)
    p = schmidt_values(state, cut) ** 2
    p = p[p > 1e-300]
    return max(0.0, float(-np.sum(p * np.log(p))))


def pauli_pair_expectation(state: StateVector, axis: str, q_a: int, q_b: int) -> float:
    """<P_a P_b> for a Pauli axis in {X, Y, Z}; qubits need not be adjacent."""
    _check_qubits(state, q_a, q_b)
    if axis == "Z":
        idx = np.arange(state.dim)
        sign = 1 - 2 * (((idx >> q_a) ^ (idx >> q_b)) & 1)
        return float(np.dot(state.probabilities(), sign))
    p = PAULI[axis]
    tmp = state.copy()
    apply_single_qubit_gate(tmp, p, q_a)
    apply_single_qubit_gate(tmp, p, q_b)
    return float(state.inner(tmp).real)
