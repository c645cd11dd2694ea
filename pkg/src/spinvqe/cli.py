"""Command-line front end: ``spinvqe {run,sweep,bench,ed,analyze}``.

Exit codes: 0 success, 2 usage or invalid input, 3 optimizer abort,
4 capacity exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import eigensolver, runner
from .analysis import classify_decay, correlation_function, entropy_profile
from .ansatz import AnsatzParams, apply_ansatz
from .optimizer import METHODS, OptimizerAbort, OptimizerConfig

log = logging.getLogger("spinvqe")

EXIT_OK, EXIT_USAGE, EXIT_ABORT, EXIT_CAPACITY = 0, 2, 3, 4

# RunConfig fields settable from flags; None means "not given"
_RUN_FLAGS = ("model", "L", "delta", "p", "mode", "shots", "seed", "restarts",
              "restart_policy", "init", "periodic", "output_dir")
_OPT_FLAGS = {"method": "method", "max_iters": "max_iters", "ftol": "ftol"}


class UsageError(Exception):
    pass


def _add_run_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=Path, help="JSON file mirroring RunConfig; flags override it")
    sp.add_argument("--model", choices=("isotropic", "xxz"))
    sp.add_argument("--L", type=int, help="chain length (even)")
    sp.add_argument("--delta", type=float, help="anisotropy (xxz only)")
    sp.add_argument("--p", type=int, help="ansatz layers (default L/2)")
    sp.add_argument("--mode", choices=("exact", "sampled"))
    sp.add_argument("--shots", type=int, help="shots per measurement group")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--restart-policy", dest="restart_policy", choices=runner.RESTART_POLICIES)
    sp.add_argument("--init", choices=("uniform-random", "zeros"))
    sp.add_argument("--periodic", action="store_true", default=None, help="add the wrap bond")
    sp.add_argument("--method", choices=METHODS, help="optimizer (default: bfgs exact, spsa sampled)")
    sp.add_argument("--max-iters", dest="max_iters", type=int)
    sp.add_argument("--ftol", type=float)
    sp.add_argument("--output-dir", dest="output_dir", type=str)


def _read_json(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}")
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"{path} must hold a JSON object")
    return data


def build_config(args: argparse.Namespace) -> runner.RunConfig:
    """Merge the optional config file with command-line overrides."""
    base = _read_json(args.config) if getattr(args, "config", None) else {}
    for key in _RUN_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    opt = base.pop("optimizer", None)
    overrides = {dst: getattr(args, src) for src, dst in _OPT_FLAGS.items() if getattr(args, src, None) is not None}
    seed = base.get("seed", 0)
    try:
        if opt is None or "method" in overrides:
            # a freshly chosen method gets its own defaults
            opt = OptimizerConfig.for_mode(base.get("mode", "exact"), **overrides, seed=seed)
        else:
            if not isinstance(opt, dict):
                raise UsageError("'optimizer' must be a JSON object")
            opt = OptimizerConfig(**{**opt, **overrides, "seed": seed})
        config = runner.RunConfig.from_dict({**base, "optimizer": opt})
        return config.validate()
    except runner.CapacityError:
        raise
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _output_dir(config: runner.RunConfig, default: str) -> Path:
    return Path(config.output_dir or default)


def cmd_run(args) -> int:
    config = build_config(args)
    out = _output_dir(config, "runs/latest")
    result = runner.run_vqe(config)
    runner.write_run(result, out)
    summary = result.summary()
    print(json.dumps({k: summary[k] for k in ("final_energy", "reference_e0", "relative_error", "attempts", "stop_reason")}))
    log.info("wrote %s", out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = build_config(args)
    if args.step is None or not args.step > 0:
        raise UsageError(f"--step must be positive, got {args.step}")
    out = _output_dir(config, "runs/sweep")
    rows, summary = runner.run_sweep(args.delta_min, args.delta_max, args.step, config, workers=args.workers)
    runner.write_sweep(rows, summary, out)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps({"points": summary["points"], "failed": summary["failed"], "r2": summary["r2"]}))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.n_evals < 1 or args.shots < 1:
        raise UsageError("--n-evals and --shots must be >= 1")
    rows = runner.run_bench(args.L, n_evals=args.n_evals, shots=args.shots, seed=args.seed, delta=args.delta)
    out = Path(args.output_dir)
    runner.write_bench(rows, out)
    for r in rows:
        print(json.dumps(r))
    return EXIT_OK


def cmd_ed(args) -> int:
    if args.write_golden:
        rows = eigensolver.write_golden(Path(args.write_golden))
        print(json.dumps({"written": str(args.write_golden), "rows": len(rows)}))
        return EXIT_OK
    if args.L is None:
        raise UsageError("ed needs --L (or --write-golden)")
    if args.L < 2:
        raise UsageError(f"L must be >= 2, got {args.L}")
    h = eigensolver.build_model(args.model, args.L, args.delta, args.periodic)
    if args.method == "dense":
        res = eigensolver.dense_ground_state(h)
    elif args.method == "lanczos":
        res = eigensolver.lanczos_ground_state(h, seed=args.seed)
    else:
        res = eigensolver.ground_state(h, seed=args.seed)
    delta = 1.0 if args.model == "isotropic" else args.delta
    print(json.dumps({
        "model": args.model, "L": args.L, "delta": delta,
        "boundary": "periodic" if args.periodic else "open",
        "e0": res.e0, "method": res.method, "residual_norm": res.residual_norm,
    }))
    return EXIT_OK


def _write_profile(path: Path, header: tuple[str, str], values) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(values)


def _analysis_state(args):
    if args.ed_state:
        if args.L is None:
            raise UsageError("--ed-state needs --L")
        h = eigensolver.build_model(args.model, args.L, args.delta)
        return eigensolver.ground_state(h).ground_vector, {"source": "ed", "model": args.model, "L": args.L, "delta": args.delta}
    if args.params is None:
        raise UsageError("analyze needs --params FILE or --ed-state")
    data = _read_json(args.params)
    try:
        params = AnsatzParams.from_dict(data)
        L, delta = int(data["L"]), float(data["delta"])
        periodic = bool(data.get("periodic", False))
        state = apply_ansatz(params, delta, L, periodic)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.params} is not a valid params file: {exc}")
    return state, {"source": str(args.params), "model": data.get("model"), "L": L, "delta": delta}


def cmd_analyze(args) -> int:
    state, meta = _analysis_state(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = dict(meta)
    if args.what in ("entropy", "both"):
        prof = entropy_profile(state)
        _write_profile(out / "entropy.csv", ("cut", "entropy"), prof.values)
        report["entropy"] = [s for _, s in prof.values]
    if args.what in ("correlation", "both"):
        try:
            prof = correlation_function(state, args.reference_site, args.correlation)
        except ValueError as exc:
            raise UsageError(str(exc))
        _write_profile(out / "correlation.csv", ("distance", "correlation"), prof.values)
        report["correlation_kind"] = prof.kind
        report["reference_site"] = prof.reference_site
        try:
            fit = classify_decay(prof)
            report["decay_fit"] = {
                "preferred": fit.preferred,
                "exponential_residual": fit.exponential_residual,
                "power_law_residual": fit.power_law_residual,
                "exponential_rate": fit.exponential_rate,
                "power_law_exponent": fit.power_law_exponent,
            }
        except ValueError as exc:
            report["decay_fit"] = {"preferred": None, "reason": str(exc)}
    (out / "analysis_summary.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: report[k] for k in report if k in ("source", "decay_fit")}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinvqe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="optimize one chain")
    _add_run_options(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="VQE vs ED over a delta grid (xxz)")
    _add_run_options(sp)
    sp.add_argument("--delta-min", dest="delta_min", type=float, default=-1.0)
    sp.add_argument("--delta-max", dest="delta_max", type=float, default=1.0)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bench", help="per-evaluation timing in both modes")
    sp.add_argument("--L", nargs="+", type=int, default=[4, 8, 12, 16])
    sp.add_argument("--n-evals", dest="n_evals", type=int, default=50)
    sp.add_argument("--shots", type=int, default=1024)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--output-dir", dest="output_dir", default="runs/bench")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("ed", help="exact ground energy")
    sp.add_argument("--model", choices=("isotropic", "xxz"), default="isotropic")
    sp.add_argument("--L", type=int)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--periodic", action="store_true")
    sp.add_argument("--method", choices=("auto", "dense", "lanczos"), default="auto")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--write-golden", dest="write_golden", metavar="PATH",
                    help="regenerate the reference table at PATH")
    sp.set_defaults(func=cmd_ed)

    sp = sub.add_parser("analyze", help="entropy and correlation profiles")
    sp.add_argument("--params", type=Path, help="params.json written by run")
    sp.add_argument("--ed-state", dest="ed_state", action="store_true",
                    help="analyze the exact ground state instead of a params file")
    sp.add_argument("--model", choices=("isotropic", "xxz"), default="isotropic")
    sp.add_argument("--L", type=int)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--what", choices=("entropy", "correlation", "both"), default="both")
    sp.add_argument("--correlation", choices=("zz", "full-dot"), default="zz")
    sp.add_argument("--reference-site", dest="reference_site", type=int, default=1)
    sp.add_argument("--output-dir", dest="output_dir", default="runs/analysis")
    sp.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spinvqe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (runner.ConfigError,) as exc:
        print(f"spinvqe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (runner.CapacityError, eigensolver.CapacityError) as exc:
        print(f"spinvqe: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OptimizerAbort as exc:
        print(f"spinvqe: optimizer aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
