"""Exit criteria for the package, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
numbers, then asserts at the stated tolerance.  Run on its own with

    pytest tests/test_acceptance.py -v -s

Set ``SPINVQE_ACCEPT_L20=1`` to add the optional L=20 sampled run to
criterion 5 (about 20 minutes on one core).
"""

import os
import time

import numpy as np
import pytest

from spinvqe.analysis import classify_decay, correlation_function, entropy_profile
from spinvqe.ansatz import AnsatzParams, apply_ansatz, init_params
from spinvqe.eigensolver import (
    dense_ground_state,
    free_fermion_energy,
    ground_state,
    lanczos_ground_state,
    load_golden,
)
from spinvqe.expectation import ShotBudget, sampled_energy
from spinvqe.hamiltonian import build_isotropic, build_xxz
from spinvqe.optimizer import parameter_shift_gradient
from spinvqe.runner import RunConfig, run_bench, run_sweep, run_vqe, write_run
from spinvqe.statevector import init_bell_pairs

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


def _golden(L):
    return load_golden()[("isotropic", L, 1.0, "open")]


def test_criterion_1_exact_convergence(report):
    t0 = time.perf_counter()
    errors = {}
    for L in (4, 6, 8, 10, 12):
        cfg = RunConfig(model="isotropic", L=L, p=L // 2, mode="exact", seed=0, restarts=3, restart_policy="best")
        res = run_vqe(cfg, with_reference=False)
        errors[L] = abs(res.energy - _golden(L)) / abs(_golden(L))
    elapsed = time.perf_counter() - t0
    hits = sum(e <= 1e-3 for e in errors.values())
    ok = hits >= 4 and elapsed <= 600
    detail = ", ".join(f"L={L}: {e:.2e}" for L, e in errors.items())
    report(1, ok, f"{hits}/5 sizes within 1e-3 ({detail}); {elapsed:.0f} s")
    assert ok


def test_criterion_2_sampled_convergence(report):
    errors = {}
    for L in (4, 8, 12):
        res = run_vqe(RunConfig(model="isotropic", L=L, mode="sampled", shots=1024, seed=0), with_reference=False)
        errors[L] = abs(res.energy - _golden(L)) / abs(_golden(L))
    hits = sum(e <= 0.02 for e in errors.values())
    report(2, hits >= 2, f"{hits}/3 sizes within 2% ({', '.join(f'L={L}: {e:.2%}' for L, e in errors.items())})")
    assert hits >= 2


def test_criterion_3_delta_sweep(report, tmp_path):
    rows, summary = run_sweep(-1.0, 1.0, 0.1, RunConfig(model="xxz", L=8, mode="sampled", seed=0))
    r2 = summary["r2"]
    ok = len(rows) == 21 and summary["failed"] == 0 and r2 is not None and r2 >= 0.8
    worst = max(rows, key=lambda r: r["rel_err"] or 0)
    report(3, ok, f"R^2 = {r2:.4f} over {len(rows)} points (worst rel. error {worst['rel_err']:.1%} at delta={worst['delta']})")
    assert ok


def test_criterion_4_shot_noise_scaling(report):
    shots = [64, 256, 1024, 4096, 16384]
    state = apply_ansatz(init_params(4, seed=0, scale=1.0), 1.0, 8)
    h = build_isotropic(8)
    errs = [sampled_energy(state, h, ShotBudget(m, seed=1)).std_error for m in shots]
    slope = float(np.polyfit(np.log(shots), np.log(errs), 1)[0])
    ok = abs(slope + 0.5) <= 0.1
    report(4, ok, f"log-log slope {slope:.4f} (target -0.5 +/- 0.1)")
    assert ok


def test_criterion_5_larger_system(report):
    sizes = [16] + ([20] if os.environ.get("SPINVQE_ACCEPT_L20") == "1" else [])
    parts, ok = [], True
    for L in sizes:
        t0 = time.perf_counter()
        res = run_vqe(RunConfig(model="isotropic", L=L, mode="sampled", seed=0), with_reference=False)
        margin = (res.baseline - res.energy) / abs(res.baseline)
        ok &= margin >= 0.05
        parts.append(f"L={L}: E={res.energy:.4f} vs baseline {res.baseline:.1f} ({margin:.1%} below, "
                     f"{time.perf_counter() - t0:.0f} s)")
    if len(sizes) == 1:
        parts.append("L=20 skipped (set SPINVQE_ACCEPT_L20=1)")
    report(5, ok, "; ".join(parts))
    assert ok


def test_criterion_6_runtime_benchmark(report, tmp_path):
    from spinvqe.runner import write_bench

    rows = run_bench([4, 8, 12, 16], n_evals=50)
    write_bench(rows, tmp_path)
    exact = [r["estimate_time"] for r in rows if r["mode"] == "exact"]
    ok = (
        (tmp_path / "bench.csv").exists()
        and len(rows) == 8
        and all(r["status"] == "ok" and r["mean_eval_time"] > 0 for r in rows)
        and all(b > a for a, b in zip(exact, exact[1:]))
    )
    report(6, ok, "exact estimate times " + ", ".join(f"{t * 1e3:.3f} ms" for t in exact))
    assert ok


def test_criterion_7_verification_suite(report):
    res = run_vqe(RunConfig(model="isotropic", L=10, p=5, mode="exact", seed=0))
    ent = entropy_profile(apply_ansatz(res.params, 1.0, 10)).entropies
    # cuts 1..9; odd cuts sit at even array positions
    oscillates = all(
        ent[i] > ent[j] for i in range(0, 9, 2) for j in (i - 1, i + 1) if 0 <= j < 9
    )
    bell = entropy_profile(init_bell_pairs(10)).entropies
    bell_ok = np.allclose(bell, [np.log(2) if k % 2 == 0 else 0 for k in range(9)], atol=1e-12)
    fits = {d: classify_decay(correlation_function(ground_state(build_xxz(12, d)).ground_vector, 1)) for d in (2.5, 0.3)}
    gapped_ok = fits[2.5].preferred == "exponential"
    critical_ok = fits[0.3].preferred == "power-law"
    ok = oscillates and bell_ok and gapped_ok and critical_ok
    detail = (
        f"entropy oscillation {'ok' if oscillates else 'broken'}; Bell profile {'ok' if bell_ok else 'wrong'}; "
        f"delta=2.5 -> {fits[2.5].preferred} (exp res {fits[2.5].exponential_residual:.3f}, "
        f"pow res {fits[2.5].power_law_residual:.3f}); delta=0.3 -> {fits[0.3].preferred}"
    )
    report(7, ok, detail)
    assert oscillates and bell_ok, detail
    assert critical_ok, detail
    assert gapped_ok, detail


def test_criterion_8_oracle_integrity(report):
    worst_ed = 0.0
    for L in range(2, 13):
        for d in (-1.0, -0.5, 0.0, 0.5, 1.0, 2.5):
            h = build_xxz(L, d)
            worst_ed = max(worst_ed, abs(dense_ground_state(h).e0 - lanczos_ground_state(h).e0))
    worst_jw = max(abs(lanczos_ground_state(build_xxz(L, 0.0)).e0 - free_fermion_energy(L)) for L in (4, 8, 12))
    rng = np.random.default_rng(8)
    worst_grad = 0.0
    for _ in range(20):
        L, p = int(rng.choice([2, 4, 6, 8])), int(rng.integers(1, 4))
        delta = float(rng.uniform(-1, 2.5))
        x = rng.uniform(-np.pi, np.pi, 2 * p)
        g = parameter_shift_gradient(AnsatzParams.from_vector(x), delta, L)
        fd = parameter_shift_gradient(AnsatzParams.from_vector(x), delta, L, rule="finite-difference")
        worst_grad = max(worst_grad, float(np.max(np.abs(g - fd))))
    ok = worst_ed <= 1e-10 and worst_jw <= 1e-9 and worst_grad <= 1e-5
    report(8, ok, f"dense/Lanczos {worst_ed:.1e}, free fermion {worst_jw:.1e}, gradient vs FD {worst_grad:.1e}")
    assert ok


def test_criterion_9_determinism(report, tmp_path):
    import json

    same = []
    for mode in ("exact", "sampled"):
        out = []
        for name in ("a", "b"):
            d = tmp_path / f"{mode}-{name}"
            write_run(run_vqe(RunConfig(model="xxz", L=8, delta=0.5, mode=mode, seed=7)), d)
            trace = [json.loads(l) for l in (d / "trace.jsonl").read_text().splitlines()]
            for row in trace:
                row.pop("time")
            summary = json.loads((d / "summary.json").read_text())
            summary.pop("timings")
            out.append((trace, summary, (d / "params.json").read_text()))
        same.append(out[0] == out[1])
    ok = all(same)
    report(9, ok, f"exact identical={same[0]}, sampled identical={same[1]}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
