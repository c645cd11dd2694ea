"""Alternating-layer Hamiltonian variational ansatz.

Starting from singlets on bonds (1,2), (3,4), ..., each level ``k`` applies
``exp(-i gamma_k H2)`` (the Bell-pair bonds) followed by ``exp(-i beta_k H1)``
(the bonds in between).  Bonds inside a layer are disjoint, so each layer is
an exact product of two-qubit bond exponentials.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .statevector import StateVector, apply_two_qubit_gate, init_bell_pairs

_C = 1 / np.sqrt(2)
# two-qubit bond eigenbasis: |00>, |11>, (|01>+|10>)/sqrt2, (|01>-|10>)/sqrt2
_BOND_BASIS = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, _C, _C],
        [0, 0, _C, -_C],
        [0, 1, 0, 0],
    ],
    dtype=complex,
)
_PAULI_PAIR = {
    "X": np.fliplr(np.eye(4)).astype(complex),
    "Y": np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex),
    "Z": np.diag([1, -1, -1, 1]).astype(complex),
}


@dataclass
class AnsatzParams:
    """Layer angles; ``vector`` interleaves them as (g1, b1, ..., gp, bp)."""

    gammas: np.ndarray
    betas: np.ndarray
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=float).reshape(-1)
        self.betas = np.asarray(self.betas, dtype=float).reshape(-1)
        if len(self.gammas) != len(self.betas) or len(self.gammas) < 1:
            raise ValueError("gammas and betas must have the same length p >= 1")
        if not (np.all(np.isfinite(self.gammas)) and np.all(np.isfinite(self.betas))):
            raise ValueError("angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @property
    def vector(self) -> np.ndarray:
        return np.column_stack([self.gammas, self.betas]).reshape(-1)

    @classmethod
    def from_vector(cls, x, seed=None) -> "AnsatzParams":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or len(x) % 2:
            raise ValueError("parameter vector must be 1-d with even length")
        return cls(x[0::2], x[1::2], seed)

    def to_dict(self, delta: float | None = None, **extra) -> dict:
        d = {"p": self.p, "gammas": self.gammas.tolist(), "betas": self.betas.tolist()}
        if delta is not None:
            d["delta"] = float(delta)
        d["seed"] = self.seed
        d.update(extra)
        return d

    def to_json(self, delta: float | None = None, **extra) -> str:
        return json.dumps(self.to_dict(delta, **extra), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzParams":
        params = cls(d["gammas"], d["betas"], d.get("seed"))
        if "p" in d and d["p"] != params.p:
            raise ValueError(f"p={d['p']} does not match {params.p} stored angles")
        return params


def bond_gate(theta: float, delta: float) -> np.ndarray:
    """``exp(-i theta (SxSx + SySy + delta SzSz))`` as a 4x4 matrix."""
    phases = np.exp(
        -1j * theta * np.array([delta / 4, delta / 4, (2 - delta) / 4, (-2 - delta) / 4])
    )
    return (_BOND_BASIS * phases) @ _BOND_BASIS.conj().T


def pauli_rotation(phi: float, axis: str) -> np.ndarray:
    """``exp(-i phi P P / 4)`` for a two-qubit Pauli pair ``P P``."""
    return np.cos(phi / 4) * np.eye(4) - 1j * np.sin(phi / 4) * _PAULI_PAIR[axis]


def layer_bonds(L: int, periodic: bool = False) -> tuple[list, list]:
    """Qubit pairs of the H2 (Bell-pair) and H1 layers."""
    if L < 2 or L % 2:
        raise ValueError(f"ansatz needs an even chain length >= 2, got {L}")
    h2 = [(q, q + 1) for q in range(0, L, 2)]
    h1 = [(q, q + 1) for q in range(1, L - 1, 2)]
    if periodic and L > 2:
        h1.append((L - 1, 0))
    return h2, h1


def circuit_layers(params: AnsatzParams, L: int, periodic: bool = False) -> list[tuple[float, list]]:
    """Ordered ``(angle, bonds)`` layers, first-applied first."""
    h2, h1 = layer_bonds(L, periodic)
    layers = []
    for g, b in zip(params.gammas, params.betas):
        layers.append((float(g), h2))
        layers.append((float(b), h1))
    return layers


def apply_ansatz(
    params: AnsatzParams,
    delta: float,
    L: int,
    periodic: bool = False,
    insert=None,
) -> StateVector:
    """Prepare ``|psi(gamma, beta)>_p``.

    ``insert`` optionally maps a layer index to ``(gate, bond)`` pairs applied
    right after that layer; the gradient code uses it for shifted circuits.
    """
    state = init_bell_pairs(L)
    for k, (theta, bonds) in enumerate(circuit_layers(params, L, periodic)):
        if theta != 0 and bonds:
            gate = bond_gate(theta, delta)
            for qa, qb in bonds:
                apply_two_qubit_gate(state, gate, qa, qb)
        if insert and k in insert:
            for gate, (qa, qb) in insert[k]:
                apply_two_qubit_gate(state, gate, qa, qb)
    return state


def init_params(p: int, strategy: str = "uniform-random", seed: int | None = None, scale: float = 0.1) -> AnsatzParams:
    """Initial angles: all zeros, or uniform in ``[-scale, scale]``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if strategy == "zeros":
        return AnsatzParams(np.zeros(p), np.zeros(p), seed)
    if strategy == "uniform-random":
        x = np.random.default_rng(seed).uniform(-scale, scale, size=2 * p)
        return AnsatzParams.from_vector(x, seed)
    raise ValueError(f"unknown init strategy {strategy!r}")
