"""Nearest-neighbour XXZ / Heisenberg chain Hamiltonians as Pauli term lists.

Every ``S^a_i S^a_{i+1}`` summand is stored as a Pauli pair with coefficient
``J_a / 4`` (``S = sigma / 2``).  Sites are 1-based; site ``i`` acts on qubit
``i - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import sparse

from .statevector import PAULI, StateVector, _pair_view

AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    axis: str
    site_a: int
    site_b: int

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    @property
    def bond(self) -> tuple[int, int]:
        return (self.site_a, self.site_b)

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.site_a - 1, self.site_b - 1)


@dataclass(frozen=True)
class PauliHamiltonian:
    n_sites: int
    terms: tuple[PauliTerm, ...]
    couplings: tuple[float, float, float] = (1.0, 1.0, 1.0)
    model: str = "xxz"
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            ok = 1 <= t.site_a <= self.n_sites and 1 <= t.site_b <= self.n_sites
            wrap = self.periodic and (t.site_a, t.site_b) == (self.n_sites, 1)
            if not ok or not (t.site_b == t.site_a + 1 or wrap):
                raise ValueError(f"term {t} is not a nearest-neighbour bond of an {self.n_sites}-site chain")

    @property
    def bonds(self) -> list[tuple[int, int]]:
        seen = []
        for t in self.terms:
            if t.bond not in seen:
                seen.append(t.bond)
        return seen

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "L": self.n_sites,
            "couplings": dict(zip(("Jx", "Jy", "Jz"), map(float, self.couplings))),
            "boundary": "periodic" if self.periodic else "open",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def sparse(self) -> sparse.csr_matrix:
        """Sparse matrix built from Kronecker products of Pauli matrices.

        Independent of :func:`apply_hamiltonian`; meant for oracle checks.
        """
        L = self.n_sites
        mat = sparse.csr_matrix((1 << L, 1 << L), dtype=complex)
        for t in self.terms:
            ops = [PAULI["I"]] * L
            ops[t.site_a - 1] = PAULI[t.axis]
            ops[t.site_b - 1] = PAULI[t.axis]
            # kron puts the first factor on the highest bit
            full = reduce(lambda a, b: sparse.kron(a, b, format="csr"), ops[::-1])
            mat = mat + t.coefficient * full
        return mat

    def dense(self) -> np.ndarray:
        return self.sparse().toarray()


def _bond_terms(a: int, b: int, jx: float, jy: float, jz: float) -> list[PauliTerm]:
    return [
        PauliTerm(jx / 4, "X", a, b),
        PauliTerm(jy / 4, "Y", a, b),
        PauliTerm(jz / 4, "Z", a, b),
    ]


def _chain(L: int, jx: float, jy: float, jz: float, model: str, periodic: bool) -> PauliHamiltonian:
    if L < 2:
        raise ValueError(f"chain length must be >= 2, got {L}")
    terms = []
    for i in range(1, L):
        terms += _bond_terms(i, i + 1, jx, jy, jz)
    if periodic and L > 2:
        terms += _bond_terms(L, 1, jx, jy, jz)
    return PauliHamiltonian(L, tuple(terms), (jx, jy, jz), model, periodic)


def build_isotropic(L: int, J: float = 1.0, periodic: bool = False) -> PauliHamiltonian:
    """Open Heisenberg chain ``J sum_i S_i . S_{i+1}``."""
    return _chain(L, J, J, J, "isotropic", periodic)


def build_xxz(L: int, delta: float, periodic: bool = False) -> PauliHamiltonian:
    """XXZ chain with ``J_x = J_y = 1`` and ``J_z = delta``."""
    return _chain(L, 1.0, 1.0, float(delta), "xxz", periodic)


def _sub_hamiltonian(h: PauliHamiltonian, terms) -> PauliHamiltonian:
    return PauliHamiltonian(h.n_sites, tuple(terms), h.couplings, h.model, h.periodic)


def split_even_odd(h: PauliHamiltonian) -> tuple[PauliHamiltonian, PauliHamiltonian]:
    """Split into ``(H1, H2)``.

    H2 holds the Bell-pair bonds (1,2), (3,4), ...; H1 holds (2,3), (4,5), ...
    and, for a periodic chain, the wrap bond (L, 1).
    """
    if h.n_sites % 2:
        raise ValueError(f"even/odd split needs an even chain length, got {h.n_sites}")
    h1 = [t for t in h.terms if t.site_a % 2 == 0]
    h2 = [t for t in h.terms if t.site_a % 2 == 1]
    return _sub_hamiltonian(h, h1), _sub_hamiltonian(h, h2)


def apply_pauli_term(term: PauliTerm, amps: np.ndarray, n: int, out: np.ndarray) -> None:
    """Accumulate ``term @ amps`` into ``out`` (both flat arrays of length 2^n)."""
    qa, qb = term.qubits
    lo, hi = min(qa, qb), max(qa, qb)
    v = _pair_view(amps, n, lo, hi)
    o = _pair_view(out, n, lo, hi)
    c = term.coefficient
    for bh in (0, 1):
        for bl in (0, 1):
            parity = -1.0 if bh ^ bl else 1.0
            if term.axis == "Z":
                o[:, bh, :, bl, :] += (c * parity) * v[:, bh, :, bl, :]
            elif term.axis == "X":
                o[:, bh, :, bl, :] += c * v[:, 1 - bh, :, 1 - bl, :]
            else:
                # Y|b> = i(-1)^b |1-b>, so YY picks up -(-1)^(b_a + b_b)
                o[:, bh, :, bl, :] += (-c * parity) * v[:, 1 - bh, :, 1 - bl, :]


def apply_hamiltonian_array(h: PauliHamiltonian, amps: np.ndarray) -> np.ndarray:
    """Matrix-free ``H @ amps`` on a raw array; keeps a real dtype real."""
    if amps.shape != (1 << h.n_sites,):
        raise ValueError(f"vector of shape {amps.shape} does not match {h.n_sites} sites")
    out = np.zeros_like(amps)
    for t in h.terms:
        if t.coefficient != 0:
            apply_pauli_term(t, amps, h.n_sites, out)
    return out


def apply_hamiltonian(h: PauliHamiltonian, v: StateVector) -> StateVector:
    """Return the (unnormalized) state ``H|v>``."""
    if v.n_qubits != h.n_sites:
        raise ValueError(f"state has {v.n_qubits} qubits, Hamiltonian has {h.n_sites} sites")
    return StateVector(v.n_qubits, apply_hamiltonian_array(h, v.amplitudes))


def measurement_groups(h: PauliHamiltonian) -> dict[str, list[PauliTerm]]:
    """Partition terms into the X, Y and Z families (each mutually commuting)."""
    return {axis: [t for t in h.terms if t.axis == axis] for axis in AXES}
