"""
Experiment orchestration

run_simulation() fans seeds out to worker processes and merges the results
in seed order, so reports do not depend on the number of jobs. The
deletion-burst lower-bound experiment lives here as well.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from core.bin_state import BinState
from core.calibration import value as calibrated
from core.levels import build_thresholds, measure
from core.models import (
    DeletionModel, ExperimentConfig, LevelStatus, MetricsSample, RunReport, SeedSummary, StepEvent,
)
from core.potentials import gamma_potential
from core.process import StepCounts, run_steps
from core.randomness import RandomStream
from core.schedules import make_deletion_burst_schedule
from utils.log_manager import LOG_MESSAGES
from utils.output_manager import write_run_outputs

logger = logging.getLogger('GreedySim')

AGGREGATED_FIELDS = ("max_disc", "max_adisc", "max_overload", "final_m", "final_gamma")


@dataclass
class SeedRun:
    summary: SeedSummary
    samples: List[MetricsSample]
    events: Optional[List[StepEvent]] = None


@dataclass
class SimulationResult:
    report: RunReport
    samples: List[MetricsSample]
    events: Dict[int, List[StepEvent]] = field(default_factory=dict)


def seed_values(config: ExperimentConfig) -> List[int]:
    return [config.seed + k for k in range(config.seeds_count)]


def initial_state(config: ExperimentConfig) -> BinState:
    if config.initial_load:
        return BinState.balanced(config.n, config.initial_load)
    return BinState.empty(config.n)


def run_seed(config: ExperimentConfig, seed: int) -> SeedRun:
    """Run one replica; a pure function of (config, seed)"""
    logger.debug(LOG_MESSAGES["seed_started"].format(seed, config.steps))
    rng = RandomStream(seed)
    state = initial_state(config)
    logger.debug(LOG_MESSAGES["initial_state"].format(state.n, state.total_load))
    schedule = config.schedule.for_replica(seed)
    thresholds = None
    if config.thresholds_enabled:
        thresholds = build_thresholds(config.n, config.effective_beta_hat, config.gamma)

    def snapshot(t: int) -> MetricsSample:
        return measure(state, t=t, alpha=config.alpha, gamma=config.gamma,
                       thresholds=thresholds, seed=seed)

    events: Optional[List[StepEvent]] = [] if config.record_events else None
    samples = [snapshot(0)]
    counts = StepCounts()
    t = 0
    while t < config.steps:
        stop = min(t + config.sample_every, config.steps)
        betas = schedule.values(t + 1, stop)
        counts = counts + run_steps(state, betas, rng, config.deletion_model, config.d, events)
        t = stop
        samples.append(snapshot(t))

    summary = summarize_seed(seed, config.steps, samples, counts)
    logger.debug(LOG_MESSAGES["seed_finished"].format(
        seed, state.total_load, summary.max_adisc, summary.max_overload))
    return SeedRun(summary, samples, events)


def summarize_seed(seed: int, steps: int, samples: Sequence[MetricsSample], counts: StepCounts) -> SeedSummary:
    last = samples[-1]
    invalid_counts = None
    if last.level_statuses is not None:
        invalid_counts = [
            sum(1 for s in samples if s.level_statuses[level] is LevelStatus.INVALID)
            for level in range(len(last.level_statuses))
        ]
    return SeedSummary(
        seed=seed,
        steps=steps,
        final_m=last.m,
        max_disc=max(s.disc for s in samples),
        max_adisc=max(s.adisc for s in samples),
        max_overload=max(s.overload for s in samples),
        final_gamma=last.gamma_potential,
        level_invalid_counts=invalid_counts,
        inserts=counts.inserts,
        deletions=counts.deletions,
        noops=counts.noops,
        samples=len(samples),
    )


def aggregate_summaries(seeds: Sequence[SeedSummary]) -> Dict[str, Dict[str, float]]:
    """mean / max / p50 / p90 of each per-seed statistic"""
    aggregates = {}
    for name in AGGREGATED_FIELDS:
        values = [getattr(s, name) for s in seeds if getattr(s, name) is not None]
        if not values:
            continue
        arr = np.asarray(values, dtype=float)
        aggregates[name] = {
            "mean": float(arr.mean()),
            "max": float(arr.max()),
            "p50": float(np.quantile(arr, 0.5)),
            "p90": float(np.quantile(arr, 0.9)),
        }
    return aggregates


def _run_seeds(config: ExperimentConfig, jobs: int, progress: bool) -> List[SeedRun]:
    seeds = seed_values(config)
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(seeds))) as pool:
            # map() yields in submission order
            runs = pool.map(run_seed, [config] * len(seeds), seeds)
            return list(tqdm(runs, total=len(seeds), desc=config.name, disable=not progress))
    return [run_seed(config, seed) for seed in tqdm(seeds, desc=config.name, disable=not progress)]


def run_simulation(config: ExperimentConfig, jobs: Optional[int] = None, progress: bool = False,
                   out_dir=None) -> SimulationResult:
    """Run every seed of `config` and collect the report and sample stream"""
    config.validate()
    jobs = config.jobs if jobs is None else jobs
    logger.info(LOG_MESSAGES["run_started"].format(config.name, config.n, config.steps, config.seeds_count, jobs))
    lo, hi = config.schedule.bounds
    logger.debug(LOG_MESSAGES["schedule_built"].format(config.schedule.kind, lo, hi))
    started = time.perf_counter()

    runs = _run_seeds(config, jobs, progress)

    summaries = [run.summary for run in runs]
    report = RunReport(
        name=config.name,
        config=config.to_dict(),
        seeds=summaries,
        aggregates=aggregate_summaries(summaries),
        wall_clock_s=time.perf_counter() - started,
    )
    samples = [sample for run in runs for sample in run.samples]
    events = {run.summary.seed: run.events for run in runs if run.events is not None}
    for log in events.values():
        logger.debug(LOG_MESSAGES["events_recorded"].format(len(log)))
    logger.info(LOG_MESSAGES["run_finished"].format(config.name, report.wall_clock_s))

    target = out_dir if out_dir is not None else config.output_path
    if target is not None:
        write_run_outputs(target, report, samples, config.write_csv)
    return SimulationResult(report, samples, events)


# ============== Deletion-burst lower bound ==============

@dataclass
class LowerBoundSeed:
    seed: int
    count: int
    untouched: int
    start_fraction: float
    gamma_per_n: float
    final_m: int


@dataclass
class LowerBoundResult:
    n: int
    epsilon: float
    prefill_m: int
    burst_length: int
    per_seed: List[LowerBoundSeed]

    @property
    def per_seed_counts(self) -> List[int]:
        return [s.count for s in self.per_seed]

    @property
    def mean_count(self) -> float:
        return float(np.mean(self.per_seed_counts))

    @property
    def untouched_counts(self) -> List[int]:
        return [s.untouched for s in self.per_seed]

    @property
    def mean_untouched(self) -> float:
        return float(np.mean(self.untouched_counts))

    @property
    def start_fractions(self) -> List[float]:
        return [s.start_fraction for s in self.per_seed]


def lower_bound_seed(n: int, epsilon: float, prefill_m: int, seed: int,
                     deletion_model: DeletionModel = DeletionModel.BIN) -> LowerBoundSeed:
    """Prefill with beta = 1, then run the deletion burst and count the tall bins

    `count` is the number of bins at load >= floor(m(T)/n) + ln(n)/2 at the
    end. `untouched` is the number of bins that held >= floor(m/n) when the
    burst started and lost no ball during it.
    """
    rng = RandomStream(seed)
    state = BinState.empty(n)
    run_steps(state, np.ones(prefill_m), rng, deletion_model)

    floor_average = state.total_load // n
    tall = [load >= floor_average for load in state.loads]
    start_fraction = sum(tall) / n
    gamma_per_n = gamma_potential(state, calibrated("prefill_alpha")) / n
    logger.debug(LOG_MESSAGES["prefill_done"].format(seed, gamma_per_n, start_fraction))

    schedule = make_deletion_burst_schedule(n, 1.0, prefill_m, epsilon)
    logger.debug(LOG_MESSAGES["burst_schedule"].format(schedule.burst_beta, schedule.burst_length, prefill_m))
    events: List[StepEvent] = []
    run_steps(state, schedule.values(prefill_m + 1, schedule.length), rng, deletion_model, events=events)

    touched = {e.bin for e in events if e.load_delta < 0}
    untouched = sum(1 for bin_id, was_tall in enumerate(tall) if was_tall and bin_id not in touched)
    level = state.total_load // n + math.log(n) / 2
    count = sum(1 for load in state.loads if load >= level)
    logger.debug(LOG_MESSAGES["lower_bound_seed"].format(seed, count, untouched))
    return LowerBoundSeed(seed, count, untouched, start_fraction, gamma_per_n, state.total_load)


def lower_bound_experiment(n: int, epsilon: float, prefill_m: Optional[int] = None, seeds: int = 10,
                           master_seed: int = 0, jobs: int = 1,
                           deletion_model: DeletionModel = DeletionModel.BIN) -> LowerBoundResult:
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if prefill_m is None:
        prefill_m = n * math.ceil(math.log(n))
    if prefill_m < n:
        raise ValueError(f"prefill_m must be at least n={n}, got {prefill_m}")
    seed_list = [master_seed + k for k in range(seeds)]
    args = ([n] * seeds, [epsilon] * seeds, [prefill_m] * seeds, seed_list, [deletion_model] * seeds)
    if jobs > 1 and seeds > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, seeds)) as pool:
            per_seed = list(pool.map(lower_bound_seed, *args))
    else:
        per_seed = list(map(lower_bound_seed, *args))
    burst = make_deletion_burst_schedule(n, 1.0, prefill_m, epsilon).burst_length
    return LowerBoundResult(n, epsilon, prefill_m, burst, per_seed)
