"""Variational ground-state preparation for 1D Heisenberg and XXZ chains.

A pure-numpy statevector simulator, the alternating bond-layer ansatz, exact
and shot-sampled energy estimators, classical optimizers, an exact
diagonalization oracle and state diagnostics.
"""

from .analysis import classify_decay, correlation_function, entropy_profile, r_squared
from .ansatz import AnsatzParams, apply_ansatz, bond_gate, init_params
from .eigensolver import dense_ground_state, ground_state, lanczos_ground_state, reference_energy
from .expectation import EnergyEstimate, ShotBudget, cost_function, exact_energy, sampled_energy
from .hamiltonian import PauliHamiltonian, build_isotropic, build_xxz, split_even_odd
from .optimizer import OptimizerConfig, minimize
from .runner import RunConfig, run_vqe
from .statevector import StateVector, init_bell_pairs

__version__ = "0.1.0"

__all__ = [
    "AnsatzParams", "EnergyEstimate", "OptimizerConfig", "PauliHamiltonian", "RunConfig",
    "ShotBudget", "StateVector", "apply_ansatz", "bond_gate", "build_isotropic", "build_xxz",
    "classify_decay", "correlation_function", "cost_function", "dense_ground_state",
    "entropy_profile", "exact_energy", "ground_state", "init_bell_pairs", "init_params",
    "lanczos_ground_state", "minimize", "r_squared", "reference_energy", "run_vqe",
    "sampled_energy", "split_even_odd",
]
