"""Diagnostics of prepared states: correlations, entanglement, goodness of fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import StateVector, _check_normalized, pauli_pair_expectation, subsystem_entropy


@dataclass
class CorrelationProfile:
    reference_site: int
    values: list[tuple[int, float]]
    kind: str = "zz"

    @property
    def distances(self) -> np.ndarray:
        return np.array([r for r, _ in self.values])

    @property
    def correlations(self) -> np.ndarray:
        return np.array([c for _, c in self.values])


@dataclass
class EntropyProfile:
    values: list[tuple[int, float]]

    @property
    def cuts(self) -> np.ndarray:
        return np.array([cut for cut, _ in self.values])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([s for _, s in self.values])


def correlation_function(state: StateVector, reference_site: int = 1, kind: str = "zz") -> CorrelationProfile:
    """Spin-spin correlation from ``reference_site`` (1-based) to every site to its right.

    ``kind="zz"`` gives ``<S^z_i S^z_{i+r}>``; ``kind="full-dot"`` gives
    ``<S_i . S_{i+r}>``.
    """
    L = state.n_qubits
    if not 1 <= reference_site < L:
        raise ValueError(f"reference_site must lie in 1..{L - 1}, got {reference_site}")
    if kind not in ("zz", "full-dot"):
        raise ValueError(f"unknown correlation kind {kind!r}")
    _check_normalized(state)
    axes = ("Z",) if kind == "zz" else ("X", "Y", "Z")
    q0 = reference_site - 1
    values = []
    for r in range(1, L - q0):
        c = sum(pauli_pair_expectation(state, a, q0, q0 + r) for a in axes) / 4
        values.append((r, c))
    return CorrelationProfile(reference_site, values, kind)


def entropy_profile(state: StateVector) -> EntropyProfile:
    return EntropyProfile([(cut, subsystem_entropy(state, cut)) for cut in range(1, state.n_qubits)])


def r_squared(predicted, reference) -> float:
    """Coefficient of determination of ``predicted`` against ``reference``."""
    predicted = np.asarray(predicted, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if predicted.shape != reference.shape or predicted.ndim != 1 or len(reference) < 2:
        raise ValueError("predicted and reference must be 1-d with equal length >= 2")
    ss_tot = float(np.sum((reference - reference.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("R^2 is undefined for a constant reference")
    ss_res = float(np.sum((reference - predicted) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class DecayFit:
    exponential_residual: float
    power_law_residual: float
    exponential_rate: float
    power_law_exponent: float

    @property
    def preferred(self) -> str:
        return "exponential" if self.exponential_residual < self.power_law_residual else "power-law"


def _linear_residual(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid), float(coef[0])


def classify_decay(profile: CorrelationProfile, floor: float = 1e-14) -> DecayFit:
    """Compare ``ln|C|`` vs ``r`` (exponential) against ``ln|C|`` vs ``ln r`` (power law).

    Points with ``|C| <= floor`` are dropped; at least three must remain.
    """
    r = profile.distances.astype(float)
    c = np.abs(profile.correlations)
    keep = c > floor
    if keep.sum() < 3:
        raise ValueError("need at least three non-vanishing correlations to fit a decay")
    r, logc = r[keep], np.log(c[keep])
    exp_res, exp_slope = _linear_residual(r, logc)
    pow_res, pow_slope = _linear_residual(np.log(r), logc)
    return DecayFit(exp_res, pow_res, -exp_slope, -pow_slope)
