"""Command line front end: single runs and scalability sweeps."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .benchmarks import maxcut_problem_from_file, maxcut_torus_problem, rosenbrock_problem, trap_problem
from .core import ConfigurationError
from .ims import Budgets, IMSConfig, Runner
from .linkage import LinkageConfig, linkage_spec_string, parse_linkage_spec
from .realvalued import RVConfig

DEFAULT_MAX_EVALS = {"discrete": 1e7, "real": 1e8}
DEFAULT_MAX_SECONDS = 3600.0
OUTPUT_DIR_ENV = "GOMEA_OUTPUT_DIR"

PROBLEM_DOMAIN = {"trap": "discrete", "maxcut": "discrete", "rosenbrock": "real"}


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, choices=sorted(PROBLEM_DOMAIN))
    p.add_argument("--domain", choices=["discrete", "real"], help="checked against the problem")
    p.add_argument("--l", "--ell", dest="ell", type=int, help="number of variables")
    p.add_argument("--k", type=int, default=5, help="trap block size")
    p.add_argument("--m", type=int, help="MaxCut torus side (ell = m*m)")
    p.add_argument("--instance", help="MaxCut instance file")
    p.add_argument("--vtr", type=float, help="value to reach (success threshold)")
    p.add_argument("--mode", choices=["gbo", "bbo"], default="gbo")
    p.add_argument(
        "--linkage",
        help="univariate | full | block:<b> | lt:<mi|nmi>[:filtered][:max=<s>] | "
        "slt[:max=<s>] | custom:<path> | cond:<ucondgg|ucondfg|ucondhg|mcondhg:<c>> "
        "(default: slt in gbo mode, lt:mi in bbo mode)",
    )
    p.add_argument("--max-evals", type=float, help="evaluation-unit budget (default 1e7 discrete / 1e8 real)")
    p.add_argument("--max-seconds", type=float, default=DEFAULT_MAX_SECONDS)
    p.add_argument("--max-generations", type=int, default=-1)
    p.add_argument("--max-populations", type=int, default=25)
    p.add_argument("--base-population-size", type=int, help="default 2 discrete / 10 real")
    p.add_argument("--subgeneration-factor", type=int, help="default 4 discrete / 8 real")
    p.add_argument("--lower-init-range", type=float, default=0.0)
    p.add_argument("--upper-init-range", type=float, default=1.0)
    p.add_argument("--seed", type=int, help="unset draws one from entropy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gomea-core",
        description="Discrete and real-valued GOMEA with gray-box partial evaluations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single optimization run")
    _add_run_options(run_p)
    run_p.add_argument("--output", help=f"statistics CSV path (default under ${OUTPUT_DIR_ENV} or cwd)")

    sweep_p = sub.add_parser("sweep", help="repeated seeded runs over problem sizes")
    _add_run_options(sweep_p)
    sweep_p.add_argument("--dims", required=True, help="comma-separated problem sizes")
    sweep_p.add_argument("--repeats", type=int, default=10)
    sweep_p.add_argument("--base-seed", type=int, default=0, help="run r uses seed base+r")
    sweep_p.add_argument("--output", help="summary CSV path")
    return parser


def _make_problem(args, ell: int):
    if args.problem == "trap":
        return trap_problem(ell, args.k)
    if args.problem == "maxcut":
        if args.instance:
            return maxcut_problem_from_file(args.instance)
        if args.m is None:
            raise ConfigurationError("maxcut needs --m or --instance")
        return maxcut_torus_problem(args.m)
    if args.problem == "rosenbrock":
        return rosenbrock_problem(ell, args.vtr if args.vtr is not None else 1e-10)
    raise ConfigurationError(f"unknown problem {args.problem!r}")


def _resolve_ell(args) -> int:
    if args.problem == "maxcut":
        if args.instance:
            from .benchmarks import read_maxcut_instance

            m, _ = read_maxcut_instance(args.instance)
            return m * m
        if args.m is None:
            raise ConfigurationError("maxcut needs --m or --instance")
        return args.m * args.m
    if args.ell is None:
        raise ConfigurationError(f"{args.problem} needs --l")
    return args.ell


def _build_runner(args, ell: int, seed: int | None):
    problem = _make_problem(args, ell)
    domain = PROBLEM_DOMAIN[args.problem]
    if args.domain is not None and args.domain != domain:
        raise ConfigurationError(f"{args.problem} is a {domain} problem, not {args.domain}")
    if args.vtr is not None:
        problem.vtr = args.vtr
    spec = args.linkage or ("slt" if args.mode == "gbo" else "lt:mi")
    linkage = parse_linkage_spec(spec)
    defaults = IMSConfig.defaults_for(domain)
    ims = IMSConfig(
        base_population_size=args.base_population_size or defaults.base_population_size,
        subgeneration_factor=args.subgeneration_factor or defaults.subgeneration_factor,
        max_populations=args.max_populations,
    )
    budgets = Budgets(
        max_generations=args.max_generations,
        max_evaluations=args.max_evals
        if args.max_evals is not None
        else DEFAULT_MAX_EVALS[domain],
        max_seconds=args.max_seconds,
    )
    rv = RVConfig(lower_init_range=args.lower_init_range, upper_init_range=args.upper_init_range)
    return Runner(problem, args.mode, linkage, ims, budgets, rv, seed=seed), linkage


def _default_output(args, seed) -> str:
    directory = os.environ.get(OUTPUT_DIR_ENV, ".")
    name = f"{args.problem}_{args.mode}_s{seed}.csv"
    return os.path.join(directory, name)


def cmd_run(args) -> int:
    ell = _resolve_ell(args)
    runner, _ = _build_runner(args, ell, args.seed)
    stats = runner.run()
    out = args.output or _default_output(args, runner.rng.seed)
    stats.write_csv(out)
    print(f"best objective:     {runner.best.objective:.17g}")
    print(f"best constraint:    {runner.best.constraint:.17g}")
    print(f"evaluations:        {runner.counter.total:.3f}")
    print(f"elapsed seconds:    {runner.clock() - runner.start_time:.3f}")
    print(f"termination reason: {stats.metadata['termination_reason']}")
    print(f"statistics written: {out}")
    return 0


def cmd_sweep(args) -> int:
    if args.repeats < 1:
        raise ConfigurationError("--repeats must be >= 1")
    dims = [int(tok) for tok in args.dims.split(",") if tok.strip()]
    if not dims:
        raise ConfigurationError("--dims must list at least one size")
    rows = []
    spec = args.linkage or ("slt" if args.mode == "gbo" else "lt:mi")
    for ell in dims:
        evals, times, successes = [], [], 0
        for r in range(args.repeats):
            runner, linkage = _build_runner(args, ell, args.base_seed + r)
            stats = runner.run()
            if stats.metadata["termination_reason"] == "value_to_reach":
                successes += 1
                evals.append(runner.counter.total)
                times.append(runner.clock() - runner.start_time)
        def pct(data, q):
            return f"{np.percentile(data, q):.3f}" if data else ""
        rows.append(
            {
                "problem": args.problem,
                "ell": runner.problem.ell,
                "mode": args.mode,
                "linkage": linkage_spec_string(linkage),
                "runs": args.repeats,
                "successes": successes,
                "median_evals": pct(evals, 50),
                "p10_evals": pct(evals, 10),
                "p90_evals": pct(evals, 90),
                "median_time": pct(times, 50),
                "p10_time": pct(times, 10),
                "p90_time": pct(times, 90),
            }
        )
        print(
            f"{args.problem} ell={rows[-1]['ell']}: {successes}/{args.repeats} successes, "
            f"median evals {rows[-1]['median_evals'] or 'n/a'}"
        )
    out = args.output or _default_output(args, f"sweep{args.base_seed}")
    header = list(rows[0].keys())
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) for k in header) + "\n")
    print(f"summary written: {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_sweep(args)
    except ConfigurationError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
