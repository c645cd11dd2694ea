"""Exact-diagonalization reference energies.

Three independent routes to the ground-state energy:

* :func:`dense_ground_state` diagonalizes the Kronecker-product matrix,
* :func:`lanczos_ground_state` runs a restarted Lanczos iteration on the
  matrix-free ``H @ v``,
* :func:`free_fermion_energy` fills the negative single-particle levels of the
  Jordan-Wigner hopping chain (XY point, ``delta = 0``, open boundary).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.linalg

from .hamiltonian import PauliHamiltonian, apply_hamiltonian_array, build_isotropic, build_xxz
from .statevector import StateVector

log = logging.getLogger(__name__)

DENSE_MAX_SITES = 12
LANCZOS_MAX_SITES = 24
# Krylov basis memory cap; larger chains restart more often instead
_KRYLOV_BYTES = 1 << 30


class CapacityError(ValueError):
    """The requested system is too large for the chosen method."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best: "SpectrumResult"):
        super().__init__(message)
        self.best = best


@dataclass
class SpectrumResult:
    e0: float
    ground_vector: StateVector | None
    method: str
    residual_norm: float


def _residual(h: PauliHamiltonian, vec: np.ndarray, e0: float) -> float:
    return float(np.linalg.norm(apply_hamiltonian_array(h, vec) - e0 * vec))


def dense_ground_state(h: PauliHamiltonian) -> SpectrumResult:
    if h.n_sites > DENSE_MAX_SITES:
        raise CapacityError(f"dense diagonalization is limited to L <= {DENSE_MAX_SITES}, got {h.n_sites}")
    mat = h.dense()
    # XX, YY and ZZ are real in the computational basis
    evals, evecs = scipy.linalg.eigh(mat.real, subset_by_index=[0, 0])
    e0, vec = float(evals[0]), evecs[:, 0]
    residual = float(np.linalg.norm(mat.real @ vec - e0 * vec))
    return SpectrumResult(e0, StateVector(h.n_sites, vec.astype(complex)), "dense", residual)


def lanczos_ground_state(
    h: PauliHamiltonian,
    krylov_dim: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
    max_restarts: int = 30,
) -> SpectrumResult:
    """Restarted Lanczos with full reorthogonalization.

    Each cycle builds a Krylov basis of at most ``krylov_dim`` vectors (fewer
    if the basis would exceed ~1 GiB) and restarts from the current Ritz
    vector until ``||H x - e0 x|| < tol * max(1, |e0|)``.
    """
    L = h.n_sites
    if L > LANCZOS_MAX_SITES:
        raise CapacityError(f"Lanczos is limited to L <= {LANCZOS_MAX_SITES}, got {L}")
    dim = 1 << L
    m = max(2, min(krylov_dim, dim, _KRYLOV_BYTES // (8 * dim)))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    best = None
    for _ in range(max_restarts + 1):
        basis = np.empty((m, dim))
        basis[0] = x
        alphas, betas = [], []
        for j in range(m):
            w = apply_hamiltonian_array(h, basis[j])
            alphas.append(float(basis[j] @ w))
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
            b = float(np.linalg.norm(w))
            if j == m - 1 or b < 1e-12:
                break
            betas.append(b)
            basis[j + 1] = w / b
        k = len(alphas)
        evals, evecs = scipy.linalg.eigh_tridiagonal(
            np.array(alphas), np.array(betas[: k - 1]), select="i", select_range=(0, 0)
        )
        e0 = float(evals[0])
        x = evecs[:, 0] @ basis[:k]
        x /= np.linalg.norm(x)
        res = _residual(h, x, e0)
        best = SpectrumResult(e0, StateVector(L, x.astype(complex)), "lanczos", res)
        if res < tol * max(1.0, abs(e0)):
            return best
        log.debug("lanczos restart: e0=%.12f residual=%.2e", e0, res)
    raise ConvergenceError(f"Lanczos did not reach residual {tol:g} after {max_restarts} restarts", best)


def ground_state(h: PauliHamiltonian, **kwargs) -> SpectrumResult:
    """Dense for L <= 10, Lanczos above."""
    if h.n_sites <= 10:
        return dense_ground_state(h)
    return lanczos_ground_state(h, **kwargs)


def free_fermion_levels(L: int) -> np.ndarray:
    """Single-particle energies of the open XY chain after Jordan-Wigner.

    ``(SxSx + SySy)`` on a bond equals ``(c_i^dag c_j + h.c.) / 2``.
    """
    hop = np.zeros((L, L))
    for i in range(L - 1):
        hop[i, i + 1] = hop[i + 1, i] = 0.5
    return np.linalg.eigvalsh(hop)


def free_fermion_energy(L: int) -> float:
    eps = free_fermion_levels(L)
    return float(eps[eps < 0].sum())


# golden reference table -----------------------------------------------------

GOLDEN_FIELDS = ("model", "L", "delta", "boundary", "e0", "residual")


def golden_grid() -> list[tuple[str, int, float]]:
    rows = [("isotropic", L, 1.0) for L in range(2, 17)]
    sweep = [round(-1 + 0.1 * i, 1) for i in range(21)]
    for L in (4, 8):
        rows += [("xxz", L, d) for d in sweep]
    for L in (10, 12):
        rows += [("xxz", L, d) for d in (0.3, 2.5)]
    return rows


def build_model(model: str, L: int, delta: float = 1.0, periodic: bool = False) -> PauliHamiltonian:
    if model == "isotropic":
        return build_isotropic(L, periodic=periodic)
    if model == "xxz":
        return build_xxz(L, delta, periodic)
    raise ValueError(f"unknown model {model!r}")


def write_golden(path: Path, grid=None) -> list[dict]:
    rows = []
    for model, L, delta in grid or golden_grid():
        res = ground_state(build_model(model, L, delta))
        rows.append({
            "model": model, "L": L, "delta": delta, "boundary": "open",
            "e0": repr(res.e0), "residual": f"{res.residual_norm:.3e}",
        })
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=GOLDEN_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    return rows


@lru_cache(maxsize=8)
def _golden_text(path: str | None) -> str:
    if path is None:
        return resources.files("spinvqe").joinpath("data/golden_e0.csv").read_text()
    return Path(path).read_text()


def load_golden(path=None) -> dict[tuple[str, int, float, str], float]:
    text = _golden_text(None if path is None else str(path))
    table = {}
    for row in csv.DictReader(text.splitlines()):
        key = (row["model"], int(row["L"]), round(float(row["delta"]), 6), row["boundary"])
        table[key] = float(row["e0"])
    return table


def reference_energy(model: str, L: int, delta: float = 1.0, periodic: bool = False) -> float:
    """Golden-table ground energy, falling back to a fresh solve."""
    boundary = "periodic" if periodic else "open"
    if model == "xxz" and abs(delta - 1.0) < 1e-12:
        model = "isotropic"
    key = (model, L, round(float(delta) if model == "xxz" else 1.0, 6), boundary)
    table = load_golden()
    if key in table:
        return table[key]
    return ground_state(build_model(model, L, delta, periodic)).e0
