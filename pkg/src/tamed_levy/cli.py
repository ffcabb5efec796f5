"""Command line entry point: ``python -m tamed_levy <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .delay import simulate_delay
from .errors import ConfigurationError, InvariantError
from .model import DESCRIPTIONS, DelayProblem, builtin, problem_names
from .noise import GridSpec, make_noise
from .scheme import SchemeConfig, simulate

EXIT_OK, EXIT_CONFIG, EXIT_INTERNAL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def parse_levels(text: str) -> list[int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty level range {text!r}")
    return list(range(lo, hi + 1))


def _experiment_args(p):
    p.add_argument("--problem", required=True)
    p.add_argument("--levels", type=parse_levels, required=True, help="inclusive range a:b")
    p.add_argument("--ref-level", type=int, required=True)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--metric", choices=["terminal", "sup"], default="terminal")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tamed-levy", description="Tamed Euler schemes for Levy-driven SDEs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="dump one trajectory as CSV")
    sim.add_argument("--problem", required=True)
    sim.add_argument("--n", type=int, required=True, help="steps per unit time")
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--theta", type=float, default=0.5)
    sim.add_argument("--untamed", action="store_true")
    sim.add_argument("--out")

    _experiment_args(sub.add_parser("convergence", help="strong-error experiment"))
    _experiment_args(sub.add_parser("compare-untamed", help="tamed vs untamed errors and moments"))
    sub.add_parser("list-problems", help="show built-in problems")
    return parser


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _experiment(args, compare: bool) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        problem=args.problem,
        levels=args.levels,
        ref_level=args.ref_level,
        paths=args.paths,
        base_seed=args.seed,
        theta=args.theta,
        error_time="terminal" if args.metric == "terminal" else "running_max",
        compare_untamed=compare,
    )


def _dispatch(args) -> int:
    if args.command == "list-problems":
        for name in problem_names():
            print(f"{name}\t{DESCRIPTIONS[name]}")
        return EXIT_OK

    if args.command == "simulate":
        problem = builtin(args.problem)
        config = SchemeConfig(args.n, args.theta, not args.untamed)
        grid = GridSpec(problem.t0, problem.t1, args.n)
        noise = make_noise(args.seed, 0, grid, problem.m, problem.levy)
        run = simulate_delay if isinstance(problem, DelayProblem) else simulate
        traj = run(problem, config, noise)
        _emit(harness.trajectory_csv(traj.times, traj.states), args.out)
        if traj.diverged:
            print("warning: trajectory reached a non-finite state", file=sys.stderr)
        return EXIT_OK

    config = _experiment(args, compare=False)
    if args.command == "convergence":
        report = harness.strong_error(config, workers=args.workers)
        _emit(report.to_csv(), args.out)
        print(
            f"fitted rate: L2 {report.fitted_rate_l2:.4f}, L1 {report.fitted_rate_l1:.4f} "
            f"({report.wall_time:.1f}s)",
            file=sys.stderr,
        )
        return EXIT_OK

    rows = harness.compare_untamed(config, workers=args.workers)
    _emit(harness.comparison_csv(rows), args.out)
    return EXIT_OK


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return _dispatch(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run_cli())
