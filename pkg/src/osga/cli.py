"""Command-line interface.

Subcommands:
  solve    run a single solver from a config file
  bench    run the full solver grid from a config file
  project  one-shot projection utility for debugging

Exit codes: 0 success, 2 config error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import domains, harness

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _add_common(p):
    p.add_argument("--config", required=True, help="path to a key = value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out-dir", help="override the output directory")
    p.add_argument("--max-iter", type=int, help="override the iteration budget")
    p.add_argument("--solver", help="restrict to a single solver")


def _load(args) -> harness.ExperimentConfig:
    cfg = harness.load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.solver is not None:
        overrides["solvers"] = (args.solver,)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _print_summary(summary) -> None:
    print(f"family={summary['family']} seed={summary['seed']} f_hat={summary['f_hat']:.6g}")
    for name, entry in summary["solvers"].items():
        parts = [f"{name}: f_b={entry['f_b']:.6g}"]
        for key in ("delta_final", "psnr", "isnr"):
            if key in entry:
                parts.append(f"{key}={entry[key]:.4g}")
        parts.append(f"time={entry['time_s']:.2f}s")
        print("  " + "  ".join(parts))


def _cmd_solve(args) -> int:
    cfg = _load(args)
    cfg = dataclasses.replace(cfg, solvers=(cfg.solvers[0],))
    summary = harness.run_experiment(cfg)
    _print_summary(summary)
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load(args)
    summary = harness.run_experiment(cfg)
    _print_summary(summary)
    return EXIT_OK


_PROJ_DOMAINS = ("nonneg", "l1ball", "l2ball", "linfball", "simplex", "box", "halfspace", "hyperplane")


def _build_domain(args, n):
    kind = args.domain
    if kind == "nonneg":
        return domains.NonNeg()
    if kind == "l1ball":
        return domains.L1Ball(args.xi)
    if kind == "l2ball":
        return domains.L2Ball(args.xi)
    if kind == "linfball":
        return domains.LInfBall(args.xi)
    if kind == "simplex":
        return domains.Simplex(args.xi)
    if kind == "box":
        return domains.Box(np.full(n, args.lo), np.full(n, args.hi))
    a = _parse_vector(args.a)
    if kind == "halfspace":
        return domains.Halfspace(a, args.b)
    return domains.Hyperplane(a, args.b)


def _parse_vector(text):
    return np.array([float(v) for v in text.split(",")])


def _cmd_project(args) -> int:
    y = _parse_vector(args.point)
    dom = _build_domain(args, y.shape[0])
    u = domains.project(dom, y)
    print(",".join(repr(float(v)) for v in u))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="osga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="single run from config")
    _add_common(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser("bench", help="experiment grid from config")
    _add_common(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_proj = sub.add_parser("project", help="one-shot projection utility")
    p_proj.add_argument("--domain", required=True, choices=_PROJ_DOMAINS)
    p_proj.add_argument("--point", required=True, help="comma-separated coordinates")
    p_proj.add_argument("--xi", type=float, default=1.0)
    p_proj.add_argument("--a", help="comma-separated normal vector")
    p_proj.add_argument("--b", type=float, default=0.0)
    p_proj.add_argument("--lo", type=float, default=0.0)
    p_proj.add_argument("--hi", type=float, default=1.0)
    p_proj.set_defaults(func=_cmd_project)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, domains.DomainError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
