"""
Command-line surface

Subcommands: simulate, couple, thresholds, walk (cross / hit), check-cgood
and suite. Exit codes: 0 ok, 1 a checked property failed, 2 usage or
configuration error.
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from tabulate import tabulate

from core.bin_state import BinState
from core.coupling import coupling_time_experiment, majorization_experiment
from core.errors import SimulationError
from core.experiments import run_simulation
from core.levels import build_thresholds, check_c_good
from core.models import CheckResult, DeletionModel, ExperimentConfig, RunReport
from core.randomness import RandomStream
from core.schedules import ConstantSchedule, load_schedule
from core.suites import suite_names, theorem_suite
from core.walks import (
    biased_rw_cross_prob, binomial_se, expected_hit_time, hit_time_expectation_exact,
    sample_hit_times, simulate_biased_walk_crossing,
)
from utils.helpers import get_results_dir, load_json_document
from utils.log_manager import LOG_MESSAGES
from utils.output_manager import write_report

logger = logging.getLogger('GreedySim')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# ============== Parser ==============

def _add_seed_group(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int, help="run this single seed")
    group.add_argument("--seeds", type=int, help="number of seeds, counted up from the config seed")


def _add_beta_group(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float, help="constant insertion probability")
    group.add_argument("--schedule", type=Path, help="schedule JSON document")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greedy-sim",
                                     description="Greedy[d] balls-into-bins simulator with random deletions")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    parser.add_argument("--no-log-file", action="store_true", help="log to the console only")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run a seeded simulation")
    simulate.add_argument("--config", type=Path)
    simulate.add_argument("--name")
    simulate.add_argument("--n", type=int)
    simulate.add_argument("--steps", type=int)
    _add_seed_group(simulate)
    _add_beta_group(simulate)
    simulate.add_argument("--delete-model", choices=[m.value for m in DeletionModel])
    simulate.add_argument("--d", type=int)
    simulate.add_argument("--alpha", type=float)
    simulate.add_argument("--gamma", type=int)
    simulate.add_argument("--sample-every", type=int)
    simulate.add_argument("--initial-load", type=int)
    simulate.add_argument("--thresholds", action="store_true", help="classify levels at every sample")
    simulate.add_argument("--beta-hat", type=float)
    simulate.add_argument("--jobs", type=int)
    simulate.add_argument("--csv", action="store_true", help="also write samples.csv")
    simulate.add_argument("--out", type=Path)
    simulate.add_argument("--progress", action="store_true")

    couple = commands.add_parser("couple", help="coupled-copy experiments")
    couple.add_argument("--n", type=int, default=8)
    couple.add_argument("--steps", type=int, default=10_000)
    _add_seed_group(couple)
    _add_beta_group(couple)
    couple.add_argument("--mode", choices=["majorization", "meeting"], default="majorization")
    couple.add_argument("--delete-model", choices=[m.value for m in DeletionModel], default="bin")
    couple.add_argument("--out", type=Path)

    thresholds = commands.add_parser("thresholds", help="print the critical threshold table")
    thresholds.add_argument("--n", type=int, required=True)
    thresholds.add_argument("--beta-hat", type=float, required=True)
    thresholds.add_argument("--gamma", type=int, default=1)

    walk = commands.add_parser("walk", help="random walk oracles")
    walks = walk.add_subparsers(dest="walk_command", required=True)
    cross = walks.add_parser("cross", help="biased walk crossing probability")
    cross.add_argument("--r", type=float, required=True)
    cross.add_argument("--a", type=int, required=True)
    cross.add_argument("--b", type=int, required=True)
    cross.add_argument("--trials", type=int, default=100_000)
    cross.add_argument("--seed", type=int, default=0)
    hit = walks.add_parser("hit", help="lazy reflecting walk hitting time")
    hit.add_argument("--D", type=int, required=True)
    hit.add_argument("--lazy-alpha", type=float, default=0.0)
    hit.add_argument("--trials", type=int, default=100_000)
    hit.add_argument("--seed", type=int, default=0)

    cgood = commands.add_parser("check-cgood", help="check a schedule for c-good intervals")
    cgood.add_argument("--schedule", type=Path, required=True)
    cgood.add_argument("--c", type=int, required=True)
    cgood.add_argument("--epsilon", type=float, required=True)
    cgood.add_argument("--n", type=int, required=True)
    cgood.add_argument("--t1", type=int, default=0)
    cgood.add_argument("--t2", type=int, help="end of the interval (default: end of a finite schedule)")

    suite = commands.add_parser("suite", help="run an acceptance suite")
    suite.add_argument("name", help=f"one of: all, {', '.join(suite_names())}")
    suite.add_argument("--jobs", type=int, default=1)
    suite.add_argument("--out", type=Path)
    suite.add_argument("--quick", action="store_true", help="scaled-down run")
    suite.add_argument("--seed", type=int, default=0)
    return parser


# ============== Commands ==============

def _schedule_from_args(args, default: float):
    if getattr(args, "schedule", None) is not None:
        return load_schedule(args.schedule)
    if getattr(args, "beta", None) is not None:
        return ConstantSchedule(args.beta)
    return ConstantSchedule(default)


def config_from_args(args) -> ExperimentConfig:
    """Config file first, then command-line overrides"""
    if args.config is not None:
        config = ExperimentConfig.from_dict(load_json_document(args.config))
        logger.info(LOG_MESSAGES["config_loaded"].format(args.config))
    else:
        config = ExperimentConfig()
    overrides = {
        "name": args.name, "n": args.n, "steps": args.steps, "d": args.d, "alpha": args.alpha,
        "gamma": args.gamma, "sample_every": args.sample_every, "initial_load": args.initial_load,
        "beta_hat": args.beta_hat, "jobs": args.jobs,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.seed is not None:
        config.seed, config.seeds_count = args.seed, 1
    if args.seeds is not None:
        config.seeds_count = args.seeds
    if args.schedule is not None or args.beta is not None:
        config.schedule = _schedule_from_args(args, 0.6)
    if args.delete_model is not None:
        config.deletion_model = DeletionModel(args.delete_model)
    if args.thresholds:
        config.thresholds_enabled = True
    if args.csv:
        config.write_csv = True
    if args.out is not None:
        config.output_path = str(args.out)
    return config.validate()


def cmd_simulate(args) -> int:
    config = config_from_args(args)
    out_dir = config.output_path or get_results_dir(config.name)
    result = run_simulation(config, progress=args.progress, out_dir=out_dir)
    rows = [(s.seed, s.final_m, f"{s.max_disc:.3f}", f"{s.max_adisc:.3f}", f"{s.max_overload:.3f}",
             s.inserts, s.deletions, s.noops) for s in result.report.seeds]
    print(tabulate(rows, headers=["seed", "final m", "max disc", "max adisc", "max overload",
                                  "inserts", "deletions", "no-ops"]))
    print(f"Outputs: {out_dir}")
    return EXIT_OK


def cmd_couple(args) -> int:
    schedule = _schedule_from_args(args, 0.6 if args.mode == "majorization" else 0.5)
    first = args.seed if args.seed is not None else 0
    count = args.seeds if args.seeds is not None else 1
    checks: List[CheckResult] = []
    rows = []
    for seed in range(first, first + count):
        rng = RandomStream(seed)
        if args.mode == "majorization":
            result = majorization_experiment(args.n, args.steps, schedule, rng)
            rows.append((seed, result.violations, result.first_violation))
            checks.append(CheckResult(f"majorization seed {seed}", result.passed, result.violations, 0))
        else:
            x0 = BinState.balanced(args.n, 2 * args.n).loads
            y0 = list(x0)
            y0[0] += 1
            y0[-1] -= 1
            result = coupling_time_experiment(x0, y0, schedule, DeletionModel(args.delete_model), rng,
                                              max_steps=args.steps)
            rows.append((seed, result.start_distance, result.coupled_at if not result.timed_out else "timed out"))
            checks.append(CheckResult(f"meeting seed {seed}", not result.timed_out, result.coupled_at, args.steps))
    headers = ["seed", "violations", "first violation"] if args.mode == "majorization" \
        else ["seed", "start distance", "coupled at"]
    print(tabulate(rows, headers=headers))
    passed = all(c.passed for c in checks)
    if args.out is not None:
        report = RunReport(name=f"couple-{args.mode}",
                           config={"n": args.n, "steps": args.steps, "mode": args.mode,
                                   "schedule": schedule.to_dict(), "delete_model": args.delete_model},
                           checks=checks, passed=passed)
        write_report(args.out, report)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_thresholds(args) -> int:
    th = build_thresholds(args.n, args.beta_hat, args.gamma)
    rows = [(level, f"{alpha:.4f}", f"{half:.4f}", "ok" if ok else "VIOLATED")
            for level, alpha, half, ok in th.table()]
    print(tabulate(rows, headers=["level", "alpha", "alpha/2", "sandwich"]))
    print(f"l* = {th.ell_star}, levels = {th.level_count}, log2 log2 n = {th.log_log_reference:.3f}")
    return EXIT_OK


def cmd_walk(args) -> int:
    if args.walk_command == "cross":
        empirical = simulate_biased_walk_crossing(args.r, args.a, args.b, args.trials, RandomStream(args.seed))
        try:
            expected = biased_rw_cross_prob(args.r, args.a, args.b)
        except SimulationError:
            expected = args.a / (args.a + args.b)
        se = binomial_se(expected, args.trials)
        rows = [("crossing probability", f"{empirical:.6f}", f"{expected:.6f}", f"{se:.6f}")]
        print(tabulate(rows, headers=["quantity", "empirical", "formula", "std err"]))
        return EXIT_OK
    samples = sample_hit_times(args.D, args.lazy_alpha, args.trials, RandomStream(args.seed))
    expected = expected_hit_time(args.D, args.lazy_alpha)
    rows = [("mean hit time", f"{samples.mean():.4f}", f"{expected:.4f}",
             f"{hit_time_expectation_exact(args.D, args.lazy_alpha):.4f}")]
    print(tabulate(rows, headers=["quantity", "empirical", "formula", "linear solve"]))
    return EXIT_OK


def cmd_check_cgood(args) -> int:
    schedule = load_schedule(args.schedule)
    t2 = args.t2 if args.t2 is not None else schedule.length
    if t2 is None:
        raise ValueError("--t2 is required for schedules without an end")
    result = check_c_good(schedule, (args.t1, t2), args.c, args.epsilon, args.n)
    print(result)
    return EXIT_OK if result.good else EXIT_FAILED


def cmd_suite(args) -> int:
    out = args.out
    if out is not None and out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "report.json"
    report = theorem_suite(args.name, jobs=args.jobs, out=out, quick=args.quick, seed=args.seed)
    rows = [(c.name, "PASS" if c.passed else "FAIL", c.value, c.threshold, c.note) for c in report.checks]
    print(tabulate(rows, headers=["check", "result", "value", "threshold", "note"]))
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "couple": cmd_couple,
    "thresholds": cmd_thresholds,
    "walk": cmd_walk,
    "check-cgood": cmd_check_cgood,
    "suite": cmd_suite,
}


def run_command(args) -> int:
    try:
        return COMMANDS[args.command](args)
    except (SimulationError, ValueError, OSError) as e:
        logger.error(LOG_MESSAGES["command_failed"].format(e))
        return EXIT_USAGE


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse `argv` and run the command (logging is configured by the caller)"""
    args = build_parser().parse_args(argv)
    return run_command(args)
