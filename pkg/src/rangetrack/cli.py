"""Command line interface.

    rangetrack run      --config cfg.yaml --seed 7 --out out/ --format csv [--plot]
    rangetrack mc       --config cfg.yaml --runs 20 --workers 4 --out out/ [--plot]
    rangetrack check-pe [--log out/run_seed7.csv] [--config cfg.yaml] [--window 96]
    rangetrack gate     --alpha 1.2
    rangetrack config   > cfg.yaml

Failures exit nonzero with a JSON error object on stderr.
"""

import argparse
from dataclasses import asdict
import json
import os
import sys

import numpy as np

from . import control
from .config import ConfigError, dump_config, load_config_file, paper_scenario
from .dynamics import DynamicsParams
from .harness import (SimulationError, attitude_schedule, export, load_log,
                      monte_carlo, run_scenario)
from .observability import sliding_gramian, sliding_pe
from .so3 import exp_so3


def _config(args):
    cfg = load_config_file(args.config) if args.config else paper_scenario()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_run(args):
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    log, summary = run_scenario(cfg)
    stem = f"run_seed{cfg.seed}"
    path = export(log, args.format, os.path.join(args.out, f"{stem}.{args.format}"))
    out = {"log": path, "summary": asdict(summary)}
    if args.plot:
        from .plotting import render_run
        out["figures"] = render_run(log, args.out, stem)
    return out


def cmd_mc(args):
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    result = monte_carlo(cfg, args.runs, cfg.seed, workers=args.workers)
    stem = f"mc_seed{cfg.seed}_n{args.runs}"
    path = export(result, args.format, os.path.join(args.out, f"{stem}.{args.format}"))
    out = {"results": path,
           "median": {k: v["median"] for k, v in result.aggregate.items()}}
    if args.plot:
        from .plotting import plot_monte_carlo
        out["figures"] = [plot_monte_carlo(result, os.path.join(args.out, f"{stem}_errors.png"))]
    return out


def pe_check(rotations, bq, t, window):
    """Worst-case PE and Gramian reports over all full sliding windows."""
    bq = np.asarray(bq, dtype=float)
    qs = np.array([r @ bq for r in rotations])
    cs = np.hstack([qs, np.zeros_like(qs)])
    window = min(window, len(qs))
    pes = sliding_pe(qs, window, float(np.linalg.norm(bq)))
    grams = sliding_gramian(DynamicsParams(t), cs, window)
    worst_pe = min(pes, key=lambda r: r.lambda_min)
    worst_gram = min(grams, key=lambda g: g.lambda_min / g.lambda_max if g.lambda_max else 0.0)
    return {
        "windows": len(pes),
        "window": window,
        "pe": {"lambda_min": worst_pe.lambda_min,
               "lambda_max": max(r.lambda_max for r in pes),
               "a_check": worst_pe.a_check,
               "satisfied": all(r.satisfied for r in pes)},
        "gramian": {"lambda_min": worst_gram.lambda_min,
                    "lambda_max": worst_gram.lambda_max,
                    "satisfied": all(g.satisfied for g in grams)},
    }


def cmd_check_pe(args):
    cfg = _config(args)
    window = args.window or cfg.pe_window
    if args.log:
        log = load_log(args.log)
        rotations = [exp_so3(w) for w in log.att]
        source = args.log
    else:
        rotations = attitude_schedule(cfg)
        source = f"generated ({cfg.attitude_mode})"
    report = pe_check(rotations, cfg.bq, cfg.t, window)
    report["source"] = source
    return report


def cmd_gate(args):
    coeff, stable = control.lyapunov_drift(args.alpha)
    return {"alpha": args.alpha, "drift_coeff": coeff, "stable": stable,
            "interval": [control.ALPHA_LO, control.ALPHA_HI]}


def cmd_config(args):
    cfg = _config(args)
    sys.stdout.write(dump_config(cfg))
    return None


def build_parser():
    parser = argparse.ArgumentParser(prog="rangetrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="scenario YAML (default: reference scenario)")
        if seed:
            p.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("run", help="simulate one closed-loop run")
    common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mc", help="Monte Carlo batch over consecutive seeds")
    common(p)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("check-pe", help="excitation / observability of an attitude schedule")
    common(p)
    p.add_argument("--log", help="replay attitudes from an exported run log")
    p.add_argument("--window", type=int, help="window length (default: config pe_window)")
    p.set_defaults(func=cmd_check_pe)

    p = sub.add_parser("gate", help="Lyapunov drift coefficient for a tracking gain")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("config", help="print the (default or given) scenario as YAML")
    common(p)
    p.set_defaults(func=cmd_config)
    return parser


def _fail(exc, code=1):
    err = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("key", "step", "seed"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except (ConfigError, SimulationError, OSError, ValueError) as exc:
        return _fail(exc)
    if out is not None:
        sys.stdout.write(json.dumps(out, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
