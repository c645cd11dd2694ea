"""Run orchestration: VQE jobs with restarts, Delta sweeps and timing benchmarks."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import r_squared
from .ansatz import AnsatzParams, init_bell_pairs, init_params
from .eigensolver import reference_energy
from .expectation import ShotBudget, cost_function, exact_energy, model_hamiltonian
from .optimizer import OptimizationTrace, OptimizerConfig, make_cost, make_gradient, minimize

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAX_SITES = 24
REFERENCE_MAX_SITES = 16
RESTART_POLICIES = ("baseline", "best")


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class CapacityError(ValueError):
    """System too large for this machine-scale build (CLI exit code 4)."""


@dataclass
class RunConfig:
    model: str = "isotropic"
    L: int = 8
    delta: float = 1.0
    p: int | None = None
    mode: str = "exact"
    shots: int = 1024
    optimizer: OptimizerConfig | None = None
    seed: int = 0
    restarts: int = 3
    restart_policy: str = "baseline"
    init: str = "uniform-random"
    periodic: bool = False
    output_dir: str | None = None

    def __post_init__(self):
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerConfig(**self.optimizer)
        if self.model == "isotropic":
            self.delta = 1.0
        if self.p is None and isinstance(self.L, int) and self.L >= 2:
            self.p = self.L // 2
        if self.optimizer is None and self.mode in ("exact", "sampled"):
            self.optimizer = OptimizerConfig.for_mode(self.mode, seed=self.seed)

    def validate(self) -> "RunConfig":
        if self.model not in ("isotropic", "xxz"):
            raise ConfigError(f"model must be 'isotropic' or 'xxz', got {self.model!r}")
        if not isinstance(self.L, int) or self.L < 2 or self.L % 2:
            raise ConfigError(f"L must be an even integer >= 2 (the ansatz pairs sites), got {self.L}")
        if self.L > MAX_SITES:
            raise CapacityError(f"L={self.L} exceeds the statevector limit of {MAX_SITES} sites")
        if self.p is None or self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.shots < 1:
            raise ConfigError(f"shots must be >= 1, got {self.shots}")
        if self.restarts < 0 or self.restart_policy not in RESTART_POLICIES:
            raise ConfigError(f"restarts must be >= 0 and policy one of {RESTART_POLICIES}")
        if not np.isfinite(self.delta):
            raise ConfigError("delta must be finite")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimizer"] = self.optimizer.to_dict() if self.optimizer else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class Attempt:
    index: int
    seed: int
    params: AnsatzParams
    trace: OptimizationTrace
    energy: float


@dataclass
class RunResult:
    config: RunConfig
    params: AnsatzParams
    energy: float
    final_estimate: dict
    reference_e0: float | None
    baseline: float
    attempts: list[Attempt] = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def relative_error(self) -> float | None:
        if self.reference_e0 is None:
            return None
        return abs(self.energy - self.reference_e0) / abs(self.reference_e0)

    @property
    def best_attempt(self) -> Attempt:
        return min(self.attempts, key=lambda a: a.energy)

    def summary(self) -> dict:
        best = self.best_attempt
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.config.model,
            "L": self.config.L,
            "delta": self.config.delta,
            "p": self.config.p,
            "mode": self.config.mode,
            "boundary": "periodic" if self.config.periodic else "open",
            "final_energy": self.energy,
            "final_estimate": self.final_estimate,
            "reference_e0": self.reference_e0,
            "relative_error": self.relative_error,
            "bell_pair_baseline": self.baseline,
            "below_baseline": self.energy < self.baseline,
            "attempts": len(self.attempts),
            "best_attempt": best.index,
            "iterations": len(best.trace.iterations),
            "evaluations": sum(a.trace.n_evals for a in self.attempts),
            "shots_total": int(sum(it["shots"] for a in self.attempts for it in a.trace.iterations)),
            "converged": best.trace.converged,
            "stop_reason": best.trace.stop_reason,
            "timings": self.timings,
        }


def derive_seed(master: int, *keys: int) -> int:
    return int(np.random.SeedSequence([master, *keys]).generate_state(1)[0] % (2**31))


def bell_pair_energy(L: int, delta: float, periodic: bool = False) -> float:
    """Energy of the singlet-product initial state; -3L/8 for the isotropic chain."""
    return exact_energy(init_bell_pairs(L), model_hamiltonian(L, float(delta), periodic)).value


def run_vqe(config: RunConfig, with_reference: bool = True) -> RunResult:
    """Optimize the ansatz, restarting from fresh random angles per the policy.

    ``baseline`` restarts only while the final energy stays above the
    Bell-pair energy; ``best`` always spends every restart and keeps the
    lowest final energy.
    """
    config.validate()
    t_start = time.perf_counter()
    L, delta = config.L, config.delta
    baseline = bell_pair_energy(L, delta, config.periodic)
    cost = make_cost(delta, L, config.mode, config.shots, config.periodic)
    grad = make_gradient(delta, L, config.mode, config.shots, config.periodic)
    attempts = []
    for r in range(config.restarts + 1):
        seed = config.seed if r == 0 else derive_seed(config.seed, r)
        opt = OptimizerConfig(**{**config.optimizer.to_dict(), "seed": seed})
        start = init_params(config.p, config.init, seed=seed)
        params, trace = minimize(opt, cost, start, grad)
        energy = cost_function(params, delta, L, "exact", periodic=config.periodic).value
        attempts.append(Attempt(r, seed, params, trace, energy))
        log.info("attempt %d (seed %d): E=%.10f after %d iterations", r, seed, energy, len(trace.iterations))
        if config.restart_policy == "baseline" and energy < baseline:
            break
    t_opt = time.perf_counter()
    best = min(attempts, key=lambda a: a.energy)
    if config.mode == "sampled":
        final = cost_function(best.params, delta, L, "sampled", ShotBudget(config.shots, derive_seed(config.seed, 999)), config.periodic)
    else:
        final = cost_function(best.params, delta, L, "exact", periodic=config.periodic)
    ref = None
    if with_reference and L <= REFERENCE_MAX_SITES:
        ref = reference_energy(config.model, L, delta, config.periodic)
    t_end = time.perf_counter()
    timings = {"optimize": t_opt - t_start, "reference": t_end - t_opt, "total": t_end - t_start}
    return RunResult(config, best.params, best.energy, final.to_dict(timings=False), ref, baseline, attempts, timings)


# persistence --------------------------------------------------------------

def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_run(result: RunResult, output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    _dump(output_dir / "config.json", cfg.to_dict())
    _dump(output_dir / "summary.json", result.summary())
    _dump(output_dir / "params.json", result.params.to_dict(
        cfg.delta, model=cfg.model, L=cfg.L, periodic=cfg.periodic, seed=result.best_attempt.seed,
        energy=result.energy,
    ))
    with open(output_dir / "trace.jsonl", "w") as fh:
        for a in result.attempts:
            for it in a.trace.iterations:
                fh.write(json.dumps({"attempt": a.index, **it}) + "\n")


def trace_to_csv(trace_path: Path, csv_path: Path) -> None:
    rows = [json.loads(line) for line in Path(trace_path).read_text().splitlines() if line.strip()]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attempt", "iteration", "energy", "std_error", "shots", "time"])
        for r in rows:
            writer.writerow([r["attempt"], r["iteration"], r["energy"], r["std_error"], r["shots"], r["time"]])


# sweep --------------------------------------------------------------------

def delta_grid(delta_min: float, delta_max: float, step: float) -> list[float]:
    if not step > 0:
        raise ConfigError(f"sweep step must be positive, got {step}")
    if delta_max < delta_min:
        raise ConfigError("delta_max must be >= delta_min")
    n = int(np.floor((delta_max - delta_min) / step + 1e-9)) + 1
    return [round(delta_min + i * step, 10) for i in range(n)]


def _sweep_point(args) -> dict:
    index, delta, base = args
    cfg = RunConfig(**{**base, "model": "xxz", "delta": delta, "seed": derive_seed(base["seed"], index)})
    try:
        res = run_vqe(cfg)
        return {
            "delta": delta, "e_vqe": res.energy, "e_ed": res.reference_e0,
            "rel_err": res.relative_error, "status": "ok", "seed": cfg.seed,
        }
    except Exception as exc:  # one bad point must not end the sweep
        log.warning("sweep point delta=%s failed: %s", delta, exc)
        return {"delta": delta, "e_vqe": None, "e_ed": None, "rel_err": None, "status": f"failed: {exc}", "seed": cfg.seed}


def run_sweep(delta_min: float, delta_max: float, step: float, config: RunConfig, workers: int = 1) -> tuple[list[dict], dict]:
    grid = delta_grid(delta_min, delta_max, step)
    base = config.to_dict()
    base.pop("output_dir", None)
    jobs = [(i, d, base) for i, d in enumerate(grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    ok = [r for r in rows if r["status"] == "ok" and r["e_ed"] is not None]
    r2 = None
    if len(ok) >= 2:
        r2 = r_squared([r["e_vqe"] for r in ok], [r["e_ed"] for r in ok])
    summary = {
        "schema_version": SCHEMA_VERSION, "L": config.L, "mode": config.mode, "p": config.p,
        "points": len(rows), "failed": len(rows) - len(ok), "r2": r2,
        "delta_min": delta_min, "delta_max": delta_max, "step": step,
    }
    return rows, summary


def write_sweep(rows: list[dict], summary: dict, output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["delta", "e_vqe", "e_ed", "rel_err", "status", "seed"])
        writer.writeheader()
        writer.writerows(rows)
    _dump(output_dir / "sweep_summary.json", summary)


# benchmark ----------------------------------------------------------------

BENCH_FIELDS = ("L", "mode", "mean_eval_time", "state_prep_time", "estimate_time", "energy", "std_error", "status")


def run_bench(L_list, n_evals: int = 50, shots: int = 1024, seed: int = 0, delta: float = 1.0, max_sites: int = MAX_SITES) -> list[dict]:
    """Time ``n_evals`` cost evaluations per size in both estimator modes.

    Both modes see the same angles; sampled evaluations reuse one seed, so
    the recorded estimate is reproducible.
    """
    rows = []
    for L in L_list:
        for mode in ("exact", "sampled"):
            if L > max_sites or L % 2:
                rows.append({"L": L, "mode": mode, "status": "skipped"})
                continue
            params = init_params(L // 2, seed=seed)
            budget = ShotBudget(shots, seed)
            total, prep, est_t = 0.0, 0.0, 0.0
            for _ in range(n_evals):
                t0 = time.perf_counter()
                est = cost_function(params, delta, L, mode, budget)
                total += time.perf_counter() - t0
                prep += est.stage_times["state_prep_time"]
                est_t += est.stage_times["estimate_time"]
            rows.append({
                "L": L, "mode": mode, "mean_eval_time": total / n_evals,
                "state_prep_time": prep / n_evals, "estimate_time": est_t / n_evals,
                "energy": est.value, "std_error": est.std_error, "status": "ok",
            })
    return rows


def write_bench(rows: list[dict], output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / "bench.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
