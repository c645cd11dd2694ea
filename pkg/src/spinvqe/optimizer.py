"""Classical outer loop: Nelder-Mead, SPSA, gradient descent and BFGS.

All methods are deterministic given ``OptimizerConfig.seed``.  The cost
handle receives ``(x, eval_seed)``; ``eval_seed`` is derived from the config
seed and the evaluation counter so sampled costs see fresh, reproducible
shot noise on every call.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize

from .ansatz import AnsatzParams, apply_ansatz, bond_gate, circuit_layers, pauli_rotation
from .expectation import EnergyEstimate, ShotBudget, cost_function, exact_energy, model_hamiltonian, sampled_energy
from .hamiltonian import apply_hamiltonian_array, split_even_odd
from .statevector import StateVector, apply_two_qubit_gate

log = logging.getLogger(__name__)

METHODS = ("nelder-mead", "spsa", "parameter-shift-gd", "bfgs")

CostFn = Callable[[np.ndarray, int], EnergyEstimate]
GradFn = Callable[[np.ndarray, int], np.ndarray]


class OptimizerAbort(RuntimeError):
    """Cost returned a non-finite value; carries the trace up to that point."""

    def __init__(self, message: str, trace: "OptimizationTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class OptimizerConfig:
    """Optimizer settings.

    ``max_iters``, ``ftol`` and ``window`` default per method: SPSA runs
    1000 iterations with ``ftol=1e-3`` over a 100-iteration window (shot noise
    makes shorter windows stop early), Nelder-Mead uses a window of
    ``10 * n_params`` iterations, everything else 500 iterations, ``ftol=1e-6``
    and a 10-iteration window.
    """

    method: str = "nelder-mead"
    max_iters: int | None = None
    ftol: float | None = None
    seed: int = 0
    window: int | None = None
    # nelder-mead
    simplex_scale: float = 0.1
    # spsa gains a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma; A=None -> 0.1 max_iters
    spsa_a: float = 2.0
    spsa_c: float = 0.1
    spsa_A: float | None = None
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_smooth: int = 50
    spsa_max_step: float | None = 0.3
    # gradient descent / bfgs
    learning_rate: float = 0.1
    gtol: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        spsa = self.method == "spsa"
        if self.max_iters is None:
            self.max_iters = 1000 if spsa else 500
        if self.ftol is None:
            self.ftol = 1e-3 if spsa else 1e-6
        if self.max_iters < 1 or self.ftol <= 0 or (self.window is not None and self.window < 1):
            raise ValueError("max_iters, window and ftol must be positive")

    @classmethod
    def for_mode(cls, mode: str, **kwargs) -> "OptimizerConfig":
        """Defaults for an estimator mode: BFGS when exact, SPSA when sampled."""
        kwargs.setdefault("method", "bfgs" if mode == "exact" else "spsa")
        return cls(**kwargs)

    def stop_window(self, n_params: int) -> int:
        if self.window is not None:
            return self.window
        return {"spsa": 250, "nelder-mead": 10 * n_params}.get(self.method, 10)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptimizationTrace:
    iterations: list[dict] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "max-iter"
    n_evals: int = 0

    def record(self, k: int, x: np.ndarray, est: EnergyEstimate, elapsed: float) -> None:
        self.iterations.append({
            "iteration": k,
            "params": [float(v) for v in x],
            "energy": est.value,
            "std_error": est.std_error,
            "shots": est.shots_used,
            "time": elapsed,
        })

    @property
    def energies(self) -> np.ndarray:
        return np.array([it["energy"] for it in self.iterations])

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.energies)


def eval_seed(seed: int, counter: int) -> int:
    return int(np.random.SeedSequence([seed, counter]).generate_state(1)[0])


class _Stopper:
    """Relative best-so-far improvement below ``ftol`` across ``window`` steps.

    With ``smooth > 1`` the tracked quantity is the trailing mean of the last
    ``smooth`` values, so a single lucky shot-noise draw cannot freeze the
    best-so-far record.
    """

    def __init__(self, ftol: float, window: int, smooth: int = 1):
        self.ftol, self.window, self.smooth = ftol, window, smooth
        self.best: list[float] = []
        self._recent: list[float] = []

    def update(self, value: float) -> bool:
        self._recent = (self._recent + [value])[-self.smooth:]
        if len(self._recent) < self.smooth:
            return False
        value = float(np.mean(self._recent))
        prev = self.best[-1] if self.best else np.inf
        self.best.append(min(prev, value))
        if len(self.best) <= self.window:
            return False
        old, new = self.best[-1 - self.window], self.best[-1]
        return (old - new) < self.ftol * max(abs(new), 1e-12)


def minimize(
    config: OptimizerConfig,
    cost: CostFn,
    initial: AnsatzParams,
    gradient: GradFn | None = None,
) -> tuple[AnsatzParams, OptimizationTrace]:
    """Minimize ``cost`` from ``initial``; returns best parameters and the trace."""
    x0 = np.asarray(initial.vector, dtype=float)
    run = {
        "nelder-mead": _nelder_mead,
        "spsa": _spsa,
        "parameter-shift-gd": _gradient_descent,
        "bfgs": _bfgs,
    }[config.method]
    if config.method in ("parameter-shift-gd", "bfgs") and gradient is None:
        raise ValueError(f"{config.method} needs a gradient handle")
    trace = OptimizationTrace()
    counter = [0]
    t0 = time.perf_counter()

    def f(x: np.ndarray) -> EnergyEstimate:
        est = cost(x, eval_seed(config.seed, counter[0]))
        counter[0] += 1
        trace.n_evals = counter[0]
        if not np.isfinite(est.value):
            raise OptimizerAbort(f"non-finite cost {est.value} at evaluation {counter[0]}", trace)
        return est

    def grad(x: np.ndarray) -> np.ndarray:
        g = gradient(x, eval_seed(config.seed, counter[0]))
        counter[0] += 1
        return g

    def clock() -> float:
        return time.perf_counter() - t0

    x_best = run(config, f, grad, x0, trace, clock)
    return AnsatzParams.from_vector(x_best, initial.seed), trace


def _nelder_mead(cfg, f, grad, x0, trace, clock):
    # adaptive coefficients (Gao & Han) for higher-dimensional simplices
    n = len(x0)
    alpha, gamma = 1.0, 1.0 + 2.0 / n
    rho, sigma = 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n
    simplex = np.vstack([x0] + [x0 + cfg.simplex_scale * e for e in np.eye(n)])
    ests = [f(x) for x in simplex]
    values = np.array([e.value for e in ests])
    stopper = _Stopper(cfg.ftol, cfg.stop_window(len(x0)))
    for k in range(cfg.max_iters):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        ests = [ests[i] for i in order]
        trace.record(k, simplex[0], ests[0], clock())
        if stopper.update(values[0]):
            trace.converged, trace.stop_reason = True, "tolerance"
            break
        if np.max(np.abs(simplex[1:] - simplex[0])) < 1e-12:
            trace.stop_reason = "stall"
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        er = f(xr)
        if er.value < values[0]:
            xe = centroid + gamma * (xr - centroid)
            ee = f(xe)
            new = (xe, ee) if ee.value < er.value else (xr, er)
        elif er.value < values[-2]:
            new = (xr, er)
        else:
            if er.value < values[-1]:
                xc = centroid + rho * (xr - centroid)
                ec = f(xc)
                accept = ec.value <= er.value
            else:
                xc = centroid + rho * (simplex[-1] - centroid)
                ec = f(xc)
                accept = ec.value < values[-1]
            if accept:
                new = (xc, ec)
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    ests[i] = f(simplex[i])
                    values[i] = ests[i].value
                continue
        simplex[-1], ests[-1], values[-1] = new[0], new[1], new[1].value
    return simplex[int(np.argmin(values))]


def _spsa(cfg, f, grad, x0, trace, clock):
    """Simultaneous-perturbation stochastic approximation (Spall's gains).

    The energy recorded for iterate ``x_k`` is the mean of the two perturbed
    evaluations; the returned point is the last iterate, which is less biased
    by shot noise than the noisiest-lowest one.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5B5A]))
    n = len(x0)
    A = cfg.spsa_A if cfg.spsa_A is not None else 0.1 * cfg.max_iters
    a, c = cfg.spsa_a, cfg.spsa_c
    x = x0.copy()
    stopper = _Stopper(cfg.ftol, cfg.stop_window(len(x0)), smooth=cfg.spsa_smooth)
    for k in range(cfg.max_iters):
        ak = a / (k + 1 + A) ** cfg.spsa_alpha
        ck = c / (k + 1) ** cfg.spsa_gamma
        d = rng.choice([-1.0, 1.0], size=n)
        ep, em = f(x + ck * d), f(x - ck * d)
        est = EnergyEstimate(
            0.5 * (ep.value + em.value),
            0.5 * float(np.hypot(ep.std_error, em.std_error)),
            ep.shots_used + em.shots_used,
        )
        trace.record(k, x, est, clock())
        g = (ep.value - em.value) / (2 * ck) * d
        step = ak * g
        if cfg.spsa_max_step is not None:
            norm = float(np.linalg.norm(step))
            if norm > cfg.spsa_max_step:
                step *= cfg.spsa_max_step / norm
        x = x - step
        if stopper.update(est.value):
            trace.converged, trace.stop_reason = True, "tolerance"
            break
    return x


def _gradient_descent(cfg, f, grad, x0, trace, clock):
    x = x0.copy()
    best_x, best_v = x.copy(), np.inf
    stopper = _Stopper(cfg.ftol, cfg.stop_window(len(x0)))
    for k in range(cfg.max_iters):
        est = f(x)
        trace.record(k, x, est, clock())
        if est.value < best_v:
            best_x, best_v = x.copy(), est.value
        if stopper.update(est.value):
            trace.converged, trace.stop_reason = True, "tolerance"
            break
        x = x - cfg.learning_rate * grad(x)
    return best_x


def _bfgs(cfg, f, grad, x0, trace, clock):
    """Quasi-Newton descent on the analytic gradient (scipy's BFGS)."""
    stopper = _Stopper(cfg.ftol, cfg.stop_window(len(x0)))
    last = {}

    def fun(x):
        est = f(x)
        last["x"], last["est"] = x.copy(), est
        return est.value

    def callback(intermediate_result):
        x = intermediate_result.x
        est = last["est"] if np.array_equal(last["x"], x) else f(x)
        trace.record(len(trace.iterations), x, est, clock())
        if stopper.update(est.value):
            trace.converged, trace.stop_reason = True, "tolerance"
            raise StopIteration

    res = scipy.optimize.minimize(
        fun, x0, jac=grad, method="BFGS", callback=callback,
        options={"maxiter": cfg.max_iters, "gtol": cfg.gtol},
    )
    if not trace.converged:
        if res.status == 0:
            trace.converged, trace.stop_reason = True, "tolerance"
        elif res.status == 2:
            trace.stop_reason = "stall"
    if not trace.iterations:
        trace.record(0, res.x, f(res.x), clock())
    return res.x


def parameter_shift_gradient(
    params: AnsatzParams,
    delta: float,
    L: int,
    mode: str = "exact",
    budget: ShotBudget | None = None,
    periodic: bool = False,
    rule: str = "shift",
    step: float = 1e-5,
) -> np.ndarray:
    """Gradient of the energy w.r.t. the interleaved (gamma, beta) vector.

    ``rule="shift"`` writes each bond exponential as the commuting product
    ``exp(-i t XX/4) exp(-i t YY/4) exp(-i t delta ZZ/4)`` and applies the
    two-term shift rule (shift pi, prefactor 1/4) to every factor.
    ``rule="finite-difference"`` uses central differences with ``step``.
    """
    x = params.vector
    h = model_hamiltonian(L, float(delta), periodic)
    budget = budget or ShotBudget()
    calls = [0]

    def energy(state) -> float:
        if mode == "exact":
            return exact_energy(state, h).value
        calls[0] += 1
        return sampled_energy(state, h, ShotBudget(budget.shots_per_group, eval_seed(budget.seed, calls[0]))).value

    grad = np.zeros_like(x)
    if rule == "adjoint":
        if mode != "exact":
            raise ValueError("adjoint differentiation needs the exact estimator")
        return adjoint_gradient(params, delta, L, periodic)
    if rule == "finite-difference":
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = step
            up = AnsatzParams.from_vector(x + e)
            dn = AnsatzParams.from_vector(x - e)
            grad[i] = (energy(apply_ansatz(up, delta, L, periodic)) - energy(apply_ansatz(dn, delta, L, periodic))) / (2 * step)
        return grad
    if rule != "shift":
        raise ValueError(f"unknown gradient rule {rule!r}")

    factors = [("X", 1.0), ("Y", 1.0), ("Z", float(delta))]
    for k, (_, bonds) in enumerate(circuit_layers(params, L, periodic)):
        total = 0.0
        for bond in bonds:
            for axis, scale in factors:
                if scale == 0:
                    continue
                plus = apply_ansatz(params, delta, L, periodic, insert={k: [(pauli_rotation(np.pi, axis), bond)]})
                minus = apply_ansatz(params, delta, L, periodic, insert={k: [(pauli_rotation(-np.pi, axis), bond)]})
                total += scale * 0.25 * (energy(plus) - energy(minus))
        grad[k] = total
    return grad


def adjoint_gradient(params: AnsatzParams, delta: float, L: int, periodic: bool = False) -> np.ndarray:
    """Exact gradient by reverse-mode sweep through the layers.

    With ``lam = H psi`` and ``phi = psi`` un-applied layer by layer,
    ``dE/dtheta_k = 2 Im <lam | G_k phi>`` where ``G_k`` is the layer generator.
    """
    h = model_hamiltonian(L, float(delta), periodic)
    gen1, gen2 = split_even_odd(h)
    layers = circuit_layers(params, L, periodic)
    phi = apply_ansatz(params, delta, L, periodic)
    lam = StateVector(L, apply_hamiltonian_array(h, phi.amplitudes))
    grad = np.zeros(len(layers))
    for k in range(len(layers) - 1, -1, -1):
        theta, bonds = layers[k]
        gen = gen2 if k % 2 == 0 else gen1
        if not bonds:
            continue
        g_phi = apply_hamiltonian_array(gen, phi.amplitudes)
        grad[k] = 2.0 * float(np.vdot(lam.amplitudes, g_phi).imag)
        undo = bond_gate(-theta, delta)
        for qa, qb in bonds:
            apply_two_qubit_gate(phi, undo, qa, qb)
            apply_two_qubit_gate(lam, undo, qa, qb)
    return grad


def make_cost(delta: float, L: int, mode: str = "exact", shots: int = 1024, periodic: bool = False) -> CostFn:
    def cost(x: np.ndarray, seed: int) -> EnergyEstimate:
        budget = ShotBudget(shots, seed) if mode == "sampled" else None
        return cost_function(AnsatzParams.from_vector(x), delta, L, mode, budget, periodic)

    return cost


def make_gradient(delta: float, L: int, mode: str = "exact", shots: int = 1024, periodic: bool = False) -> GradFn:
    def gradient(x: np.ndarray, seed: int) -> np.ndarray:
        params = AnsatzParams.from_vector(x)
        if mode == "exact":
            return adjoint_gradient(params, delta, L, periodic)
        return parameter_shift_gradient(params, delta, L, mode, ShotBudget(shots, seed), periodic)

    return gradient
