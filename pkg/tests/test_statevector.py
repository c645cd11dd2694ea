import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_op, random_state, random_unitary
from spinvqe.statevector import (
    StateInvariantError,
    StateVector,
    apply_single_qubit_gate,
    apply_two_qubit_gate,
    init_bell_pairs,
    sample_bitstrings,
    subsystem_entropy,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
LN2 = np.log(2)


def test_singlet_amplitudes():
    s = init_bell_pairs(2)
    np.testing.assert_allclose(s.amplitudes, [0, 1 / np.sqrt(2), -1 / np.sqrt(2), 0], atol=1e-15)


def test_four_qubit_bell_is_product_of_singlets():
    s1 = init_bell_pairs(2).amplitudes
    np.testing.assert_allclose(init_bell_pairs(4).amplitudes, np.kron(s1, s1), atol=1e-15)


@pytest.mark.parametrize("n", [0, 1, 3, 7])
def test_bell_pairs_need_even_n(n):
    with pytest.raises(ValueError):
        init_bell_pairs(n)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        StateVector(3, np.ones(4))


def test_identity_gate_is_bit_exact():
    s = random_state(4, 0)
    before = s.amplitudes.copy()
    apply_two_qubit_gate(s, np.eye(4), 1, 3)
    assert np.array_equal(s.amplitudes, before)


def test_swap_negates_singlet():
    s = init_bell_pairs(2)
    before = s.amplitudes.copy()
    apply_two_qubit_gate(s, SWAP, 0, 1)
    np.testing.assert_allclose(s.amplitudes, -before, atol=1e-15)


def test_gate_matches_kron_oracle(rng):
    n = 5
    for qa, qb in [(0, 1), (3, 1), (0, 4), (2, 3)]:
        u = random_unitary(4, rng)
        s = random_state(n, qa * 7 + qb)
        expected = np.zeros((1 << n, 1 << n), dtype=complex)
        # local index = bit(qa) + 2 bit(qb)
        for i in range(4):
            for j in range(4):
                ket = {qa: np.outer(np.eye(2)[i & 1], np.eye(2)[j & 1]), qb: np.outer(np.eye(2)[i >> 1], np.eye(2)[j >> 1])}
                expected += u[i, j] * kron_op(ket, n)
        want = expected @ s.amplitudes
        apply_two_qubit_gate(s, u, qa, qb)
        np.testing.assert_allclose(s.amplitudes, want, atol=1e-12)


def test_single_qubit_gate_matches_kron_oracle(rng):
    u = random_unitary(2, rng)
    s = random_state(4, 3)
    want = kron_op({2: u}, 4) @ s.amplitudes
    apply_single_qubit_gate(s, u, 2)
    np.testing.assert_allclose(s.amplitudes, want, atol=1e-12)


def test_round_trip(rng):
    u = random_unitary(4, rng)
    s = random_state(4, 1)
    before = s.amplitudes.copy()
    apply_two_qubit_gate(s, u, 0, 2)
    apply_two_qubit_gate(s, u.conj().T, 0, 2)
    np.testing.assert_allclose(s.amplitudes, before, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
def test_norm_preserved_over_100_gates(seed, n):
    rng = np.random.default_rng(seed)
    s = random_state(n, seed)
    for _ in range(100):
        qa, qb = rng.choice(n, size=2, replace=False)
        apply_two_qubit_gate(s, random_unitary(4, rng), int(qa), int(qb))
    assert abs(s.norm() - 1) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_disjoint_gates_commute(seed):
    rng = np.random.default_rng(seed)
    qubits = rng.permutation(6)[:4]
    u, v = random_unitary(4, rng), random_unitary(4, rng)
    a, b = random_state(6, seed), random_state(6, seed)
    apply_two_qubit_gate(a, u, int(qubits[0]), int(qubits[1]))
    apply_two_qubit_gate(a, v, int(qubits[2]), int(qubits[3]))
    apply_two_qubit_gate(b, v, int(qubits[2]), int(qubits[3]))
    apply_two_qubit_gate(b, u, int(qubits[0]), int(qubits[1]))
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_gate_rejects_bad_qubits():
    s = random_state(3, 0)
    with pytest.raises(ValueError):
        apply_two_qubit_gate(s, np.eye(4), 1, 1)
    with pytest.raises(ValueError):
        apply_two_qubit_gate(s, np.eye(4), 0, 3)


def test_sampling_basis_state():
    assert np.all(sample_bitstrings(StateVector.basis(4), 500, seed=3) == 0)


def test_sampling_singlet_frequency():
    samples = sample_bitstrings(init_bell_pairs(2), 100_000, seed=11)
    assert abs(np.mean(samples == 1) - 0.5) < 0.01
    assert set(np.unique(samples)) == {1, 2}


def test_sampling_is_seeded():
    s = random_state(4, 5)
    assert np.array_equal(sample_bitstrings(s, 1000, seed=42), sample_bitstrings(s, 1000, seed=42))


def test_total_variation_shrinks_with_shots():
    s = random_state(4, 9)
    probs = s.probabilities()

    def tv(m):
        counts = np.bincount(sample_bitstrings(s, m, seed=2), minlength=16)
        return 0.5 * np.abs(counts / m - probs).sum()

    assert tv(100_000) < tv(1_000)


def test_sampling_rejects_unnormalized():
    with pytest.raises(StateInvariantError):
        sample_bitstrings(StateVector(2, np.array([1, 1, 0, 0])), 10)
    with pytest.raises(ValueError):
        sample_bitstrings(StateVector.basis(2), 0)


def test_entropy_product_state():
    s = StateVector.basis(6)
    assert all(subsystem_entropy(s, cut) == 0 for cut in range(1, 6))


def test_entropy_bell_pairs():
    s = init_bell_pairs(8)
    for cut in range(1, 8):
        expected = LN2 if cut % 2 else 0.0
        assert abs(subsystem_entropy(s, cut) - expected) < 1e-12


def _reverse_qubits(s: StateVector) -> StateVector:
    n = s.n_qubits
    amps = s.amplitudes.reshape([2] * n).transpose(list(reversed(range(n)))).reshape(-1)
    return StateVector(n, amps)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7))
def test_entropy_schmidt_symmetry(seed, n):
    # S(first l qubits) equals S(last n - l qubits) for any pure state
    s = random_state(n, seed)
    mirrored = _reverse_qubits(s)
    for cut in range(1, n):
        assert abs(subsystem_entropy(s, cut) - subsystem_entropy(mirrored, n - cut)) < 1e-10


def test_entropy_rejects_bad_cut():
    with pytest.raises(ValueError):
        subsystem_entropy(random_state(3, 0), 3)
