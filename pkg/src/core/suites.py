"""
Named acceptance suites

Each suite runs one experiment and compares it against a pinned threshold
(see core.calibration). `quick=True` runs a scaled-down version with the
same oracles, used by the test-suite and for smoke runs.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import stats

from core.bin_state import BinState
from core.calibration import value as calibrated
from core.coupling import coupling_time_experiment, distance_trace, distance_windows, majorization_experiment
from core.errors import UnknownSuite
from core.experiments import lower_bound_experiment, run_simulation
from core.levels import build_thresholds, level_step_probs
from core.models import CheckResult, DeletionModel, ExperimentConfig, RunReport
from core.potentials import PotentialParams, ball_potential_sum, drift_estimate, expected_drift, phi_clipped
from core.process import place_greedy, rank_insertion_probs, run_steps
from core.randomness import RandomStream, derive_seed
from core.schedules import ConstantSchedule, UniformNoiseSchedule
from core.walks import (
    biased_rw_cross_prob, binomial_se, expected_hit_time, hit_time_expectation_exact,
    hit_time_tail, sample_hit_times, simulate_biased_walk_crossing,
)
from utils.log_manager import LOG_MESSAGES
from utils.output_manager import sample_line, write_report

logger = logging.getLogger('GreedySim')

RANK_LAW_REPLAYED = 10_000
# a distance window counts only when this many runs moved inside it
MIN_MOVED_RUNS = 10
MIN_DISTANCE_WINDOWS = 3


@dataclass(frozen=True)
class SuiteContext:
    quick: bool = False
    jobs: int = 1
    seed: int = 0

    def rng(self, index: int) -> RandomStream:
        return RandomStream(derive_seed(self.seed, index))


@dataclass(frozen=True)
class Suite:
    name: str
    claim: str
    runner: Callable[[SuiteContext], List[CheckResult]]


def _check(name: str, passed, value, threshold, note: str = "") -> CheckResult:
    return CheckResult(name, bool(passed), value, threshold, note)


# ============== Potentials ==============

def _potential_identity(ctx: SuiteContext) -> List[CheckResult]:
    states = 200 if ctx.quick else 1000
    alpha = 0.05
    rng = ctx.rng(1)
    worst = 0.0
    for _ in range(states):
        loads = np.floor(rng.uniform_array(64) * 51).astype(int)
        state = BinState(loads.tolist())
        ceiling = -(-state.total_load // state.n)
        zero_excess = sum(1 for x in state.loads if x <= ceiling)
        lhs = ball_potential_sum(state, alpha) + zero_excess
        rhs = phi_clipped(state, alpha)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return [_check("ball potential identity", worst <= 1e-9, worst, 1e-9, f"{states} states, n=64")]


def _drift(ctx: SuiteContext) -> List[CheckResult]:
    multiplier = calibrated("se_multiplier")
    beta = 0.6
    epsilon = 3 / 16
    alpha = PotentialParams(epsilon * beta / 3, epsilon=epsilon, beta_lb=beta).require_drift_bound().alpha
    loads = [20] * 64
    loads[0], loads[1] = 40, 0
    state = BinState(loads)
    trials = int(calibrated("drift_trials"))
    estimate = drift_estimate(state, beta, alpha, trials, ctx.rng(2))
    exact = expected_drift(state, beta, alpha)
    checks = [
        _check("engineered state drift is negative", estimate.mean < -multiplier * estimate.std_err,
               estimate.mean, -multiplier * estimate.std_err, f"alpha={alpha:.4g}, exact={exact:.6g}"),
    ]

    small_states = 30 if ctx.quick else 100
    small_trials = 1000 if ctx.quick else 2000
    rng = ctx.rng(3)
    agree = 0
    for k in range(small_states):
        n = 2 + rng.randbelow(15)
        small = BinState([rng.randbelow(7) for _ in range(n)])
        beta_t = 0.3 + 0.6 * rng.random()
        model = DeletionModel.BIN if k % 2 == 0 else DeletionModel.BALL
        est = drift_estimate(small, beta_t, alpha, small_trials, rng, model)
        oracle = expected_drift(small, beta_t, alpha, model)
        if abs(est.mean - oracle) <= multiplier * est.std_err + 1e-12:
            agree += 1
    required = math.ceil((0.95 if ctx.quick else 0.99) * small_states)
    checks.append(_check("drift estimate matches enumeration", agree >= required, agree, required,
                         f"{small_states} states with n <= 16"))
    return checks


# ============== Process ==============

def _rank_law(ctx: SuiteContext) -> List[CheckResult]:
    n = 16
    trials = 100_000 if ctx.quick else 1_000_000
    rng = ctx.rng(4)
    loads = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.randbelow(i + 1)
        loads[i], loads[j] = loads[j], loads[i]
    state = BinState(loads)
    frozen = np.asarray(loads)
    rank_of = n - frozen - 1

    # every insert is reverted, so all targets come from the same frozen loads
    choices = np.minimum((rng.uniform_array((trials, 2)) * n).astype(np.int64), n - 1)
    first, second = choices[:, 0], choices[:, 1]
    targets = np.where(frozen[second] < frozen[first], second, first)
    replayed = min(trials, RANK_LAW_REPLAYED)
    mismatched = 0
    for k in range(replayed):
        target = place_greedy(state, (int(first[k]), int(second[k])))
        state.remove_ball(target)
        mismatched += int(target != targets[k])

    counts = np.bincount(rank_of[targets], minlength=n)
    expected = rank_insertion_probs(n) * trials
    _, p_value = stats.chisquare(counts, expected)
    significance = calibrated("chi_square_significance")
    return [
        _check("vectorized targets match place_greedy", mismatched == 0, mismatched, 0,
               f"first {replayed} inserts replayed on the state"),
        _check("rank insertion law", p_value > significance, float(p_value), significance,
               f"{trials} inserts, n={n}"),
    ]


def _determinism(ctx: SuiteContext) -> List[CheckResult]:
    steps = 5_000 if ctx.quick else 100_000
    config = ExperimentConfig(name="determinism", n=16, steps=steps, seed=ctx.seed, seeds_count=2,
                              schedule=ConstantSchedule(0.55), alpha=0.05, sample_every=100)
    first = [sample_line(s) for s in run_simulation(config).samples]
    second = [sample_line(s) for s in run_simulation(config).samples]
    checks = [_check("identical seed gives identical samples", first == second, len(first), len(second))]
    rng = ctx.rng(5)
    for model in DeletionModel:
        state = BinState.empty(64)
        run_steps(state, ConstantSchedule(0.5).values(1, steps), rng, model)
        try:
            state.verify_coherence()
            coherent, note = True, ""
        except AssertionError as e:
            coherent, note = False, str(e)
        checks.append(_check(f"coherent structures after {steps} steps ({model.value})", coherent,
                             state.total_load, None, note))
    return checks


# ============== Levels ==============

def _level_transitions(ctx: SuiteContext) -> List[CheckResult]:
    rng = ctx.rng(6)
    mismatches = 0
    bound_failures = 0
    for _ in range(200):
        n = 2 + rng.randbelow(7)
        loads = [rng.randbelow(5) for _ in range(n)]
        state = BinState(loads)
        h = 1 + rng.randbelow(max(loads) + 2)
        beta = Fraction(rng.randbelow(11), 10)
        probs = level_step_probs(state, h, beta, exact=True)
        ups = 0
        for i, j in itertools.product(range(n), repeat=2):
            target = i if loads[i] <= loads[j] else j
            if loads[target] + 1 >= h:
                ups += 1
        if probs.p_up != beta * Fraction(ups, n * n):
            mismatches += 1
        nonempty = sum(1 for x in loads if x > 0)
        tall = sum(1 for x in loads if x >= h)
        exact_down = (1 - beta) * Fraction(tall, nonempty) if nonempty else Fraction(0)
        if probs.p_down_lb > exact_down:
            bound_failures += 1
    return [
        _check("increase probability equals enumeration", mismatches == 0, mismatches, 0, "200 states, n <= 8"),
        _check("decrease bound below exact deletion probability", bound_failures == 0, bound_failures, 0),
    ]


def _thresholds(ctx: SuiteContext) -> List[CheckResult]:
    checks = []
    for exponent in (20, 24):
        for beta_hat in (0.3, 0.5, 0.7, 0.9):
            th = build_thresholds(2 ** exponent, beta_hat)
            checks.append(_check(f"sandwich n=2^{exponent} beta_hat={beta_hat}", not th.sandwich_violations,
                                 list(th.sandwich_violations), []))
    th = build_thresholds(2 ** 20, 0.5)
    gap = abs(th.level_count - th.log_log_reference)
    checks.append(_check("number of levels near log log n", gap <= 2, th.level_count,
                         round(th.log_log_reference, 4)))
    return checks


@lru_cache(maxsize=4)
def _discrepancy_runs(quick: bool, jobs: int, seed: int):
    beta = 0.6
    sizes = (32, 128) if quick else (128, 512, 2048)
    seeds = 3 if quick else 10
    factor = 20 if quick else 200
    results = {}
    for n in sizes:
        config = ExperimentConfig(
            name=f"discrepancy-n{n}", n=n, steps=int(factor * n * math.log(n)), seed=seed,
            seeds_count=seeds, schedule=ConstantSchedule(beta), gamma=int(calibrated("balls_above_gamma")),
            sample_every=n, jobs=jobs,
        )
        results[n] = run_simulation(config)
    return beta, results


def _discrepancy_log(ctx: SuiteContext) -> List[CheckResult]:
    beta, runs = _discrepancy_runs(ctx.quick, ctx.jobs, ctx.seed)
    alpha = PotentialParams(beta / 16, beta_lb=beta).require_discrepancy_bound().alpha
    factor = calibrated("adisc_factor")
    checks = []
    means = {}
    for n, result in runs.items():
        worst = max(s.max_adisc for s in result.report.seeds)
        bound = factor / alpha * math.log(n)
        means[n] = float(np.mean([s.max_adisc for s in result.report.seeds]))
        checks.append(_check(f"max adisc at n={n}", worst <= bound, worst, bound))
    small, large = min(runs), max(runs)
    ratio = means[large] / means[small]
    limit = math.log(large) / math.log(small) * calibrated("adisc_scaling_margin")
    checks.append(_check(f"adisc growth n={small}..{large}", ratio <= limit, ratio, limit))
    return checks


def _balls_above_average(ctx: SuiteContext) -> List[CheckResult]:
    _, runs = _discrepancy_runs(ctx.quick, ctx.jobs, ctx.seed)
    rng = ctx.rng(7)
    coverage = calibrated("sample_coverage")
    fraction = calibrated("balls_above_fraction")
    ok = total = 0
    for n, result in runs.items():
        by_seed: Dict[int, list] = {}
        for sample in result.samples:
            by_seed.setdefault(sample.seed, []).append(sample)
        for samples in by_seed.values():
            for _ in range(20):
                sample = samples[rng.randbelow(len(samples))]
                total += 1
                if sample.balls_above_gamma <= fraction * n:
                    ok += 1
    share = ok / total
    return [_check("balls above ceil(m/n) + gamma", share >= coverage, share, coverage,
                   f"gamma={int(calibrated('balls_above_gamma'))}, {total} samples")]


def _overload(ctx: SuiteContext) -> List[CheckResult]:
    n = 64 if ctx.quick else 1024
    seeds = 5 if ctx.quick else 20
    config = ExperimentConfig(
        name=f"overload-n{n}", n=n, steps=n * n, seed=ctx.seed, seeds_count=seeds,
        schedule=UniformNoiseSchedule(0.4, 0.7, seed=ctx.seed, per_replica=True), initial_load=10 * n,
        sample_every=n, jobs=ctx.jobs,
    )
    result = run_simulation(config)
    bound = math.log(math.log(n)) + calibrated("overload_additive")
    within = sum(1 for s in result.report.seeds if s.max_overload <= bound)
    share = within / seeds
    coverage = calibrated("sample_coverage")
    worst = max(s.max_overload for s in result.report.seeds)
    return [_check("max overload below ln ln n + constant", share >= coverage, share, coverage,
                   f"bound={bound:.3f}, worst={worst:.3f}")]


# ============== Lower bound ==============

def _lower_bound(ctx: SuiteContext) -> List[CheckResult]:
    n = 256 if ctx.quick else 4096
    seeds = 3 if ctx.quick else 10
    result = lower_bound_experiment(n, 0.1, seeds=seeds, master_seed=ctx.seed, jobs=ctx.jobs)
    needed = math.sqrt(n) / calibrated("lower_bound_divisor")
    floor_fraction = calibrated("floor_fraction")
    return [
        _check("bins untouched by the deletion burst", result.mean_untouched >= needed,
               result.mean_untouched, needed,
               f"bins at floor(m/n) + ln(n)/2: mean {result.mean_count:.2f}"),
        _check("fraction at floor average when the burst starts", min(result.start_fractions) >= floor_fraction,
               min(result.start_fractions), floor_fraction),
    ]


# ============== Coupling and walks ==============

def _majorization_violations(ctx: SuiteContext, k: int, steps: int) -> int:
    return majorization_experiment(8, steps, ConstantSchedule(0.6), ctx.rng(100 + k)).violations


def _majorization(ctx: SuiteContext) -> List[CheckResult]:
    steps = 2_000 if ctx.quick else 100_000
    seeds = 3 if ctx.quick else 20
    if ctx.jobs > 1:
        with ProcessPoolExecutor(max_workers=min(ctx.jobs, seeds)) as pool:
            per_seed = list(pool.map(_majorization_violations, [ctx] * seeds, range(seeds), [steps] * seeds))
    else:
        per_seed = [_majorization_violations(ctx, k, steps) for k in range(seeds)]
    violations = sum(per_seed)
    return [_check("random-bin copy majorizes random-ball copy", violations == 0, violations, 0,
                   f"{seeds} seeds x {steps} steps, n=8")]


def _coupling_time(ctx: SuiteContext) -> List[CheckResult]:
    n = 16 if ctx.quick else 64
    seeds = 5 if ctx.quick else 20
    schedule = ConstantSchedule(0.5)
    x0 = BinState.balanced(n, 2 * n).loads
    y0 = list(x0)
    y0[0] += 1
    y0[1] -= 1
    bound = math.ceil(calibrated("coupling_constant") * n ** 3 * math.log(n) ** 3)
    times = []
    for k in range(seeds):
        result = coupling_time_experiment(x0, y0, schedule, DeletionModel.BIN, ctx.rng(200 + k), max_steps=bound)
        times.append(result.coupled_at)
    met = [t for t in times if t is not None]
    checks = [_check("coupled copies meet within n^3 ln^3 n", len(met) == seeds, len(met), seeds,
                     f"meeting times {times}")]

    runs = 100 if ctx.quick else 200
    steps = 400 if ctx.quick else 2000
    far = list(x0)
    for i in range(4):
        far[i] += 1
        far[n - 1 - i] -= 1
    traces = np.array([distance_trace(x0, far, schedule, DeletionModel.BIN, ctx.rng(300 + k), steps)
                       for k in range(runs)])
    checks.append(_distance_check(traces, calibrated("se_multiplier")))
    return checks


def _distance_check(traces: np.ndarray, multiplier: float) -> CheckResult:
    """Mean change of Delta over each window, among runs that had not met, at most `multiplier` SE"""
    windows = [w for w in distance_windows(traces) if w.moved >= MIN_MOVED_RUNS]
    worst = max((w.mean_change - multiplier * w.std_err for w in windows), default=math.inf)
    passed = len(windows) >= MIN_DISTANCE_WINDOWS and worst <= 1e-12
    spans = ", ".join(f"[{w.start},{w.end}) {w.moved}/{w.active}" for w in windows)
    return _check("distance does not grow in expectation", passed, float(worst), 0.0,
                  f"{len(windows)} windows with >= {MIN_MOVED_RUNS} moved runs: {spans}")


def _walk_crossing(ctx: SuiteContext) -> List[CheckResult]:
    trials = 20_000 if ctx.quick else 100_000
    multiplier = calibrated("se_multiplier")
    checks = []
    grid = itertools.product((1.5, 2.0, 4.0), (1, 2, 5), (1, 2, 5))
    for index, (r, a, b) in enumerate(grid):
        expected = biased_rw_cross_prob(r, a, b)
        empirical = simulate_biased_walk_crossing(r, a, b, trials, ctx.rng(400 + index))
        tolerance = multiplier * binomial_se(expected, trials)
        checks.append(_check(f"crossing r={r} a={a} b={b}", abs(empirical - expected) <= tolerance,
                             empirical, expected, f"tolerance {tolerance:.5f}"))
    return checks


def _walk_hitting(ctx: SuiteContext) -> List[CheckResult]:
    trials = 20_000 if ctx.quick else 100_000
    limit = calibrated("walk_relative_error")
    checks = []
    for index, (D, lazy_alpha) in enumerate(((5, 0.0), (10, 0.5), (20, 0.9))):
        expected = expected_hit_time(D, lazy_alpha)
        solved = hit_time_expectation_exact(D, lazy_alpha)
        samples = sample_hit_times(D, lazy_alpha, trials, ctx.rng(500 + index))
        error = abs(samples.mean() - expected) / expected
        tail = hit_time_tail(samples, expected, n=16, a=1)
        checks.append(_check(f"hit time D={D} alpha={lazy_alpha}", error <= limit, float(error), limit,
                             f"linear solve {solved:.4f}, formula {expected:.4f}"))
        checks.append(_check(f"hit time tail D={D} alpha={lazy_alpha}", tail.passed, tail.fraction,
                             tail.reference, f"threshold {tail.threshold:.1f}"))
    return checks


SUITES: Dict[str, Suite] = {s.name: s for s in (
    Suite("potential-identity", "per-ball potential telescopes to the clipped exponential potential",
          _potential_identity),
    Suite("rank-law", "Greedy-2 hits sorted rank i with probability (2i - 1) / n^2", _rank_law),
    Suite("majorization", "random-bin deletion majorizes random-ball deletion under coupling", _majorization),
    Suite("walk-crossing", "biased walk crosses +b before -a with (r^a - 1) / (r^(a+b) - 1)", _walk_crossing),
    Suite("walk-hitting", "lazy reflecting walk hits 0 after D (D + 1) / (1 - alpha) steps", _walk_hitting),
    Suite("discrepancy-log", "absolute discrepancy stays logarithmic for constant beta > 1/2", _discrepancy_log),
    Suite("balls-above-average", "few balls sit gamma above the average", _balls_above_average),
    Suite("overload", "overload stays near ln ln n under fluctuating beta", _overload),
    Suite("lower-bound", "a deletion burst leaves many bins above the floor average", _lower_bound),
    Suite("drift", "Gamma drifts down from a high-potential state", _drift),
    Suite("coupling-time", "coupled copies one ball apart meet in polynomial time", _coupling_time),
    Suite("level-transitions", "level increase probability matches enumeration", _level_transitions),
    Suite("thresholds", "critical thresholds satisfy their sandwich bounds", _thresholds),
    Suite("determinism", "runs are reproducible and incremental structures stay coherent", _determinism),
)}


def theorem_suite(selector: str, jobs: int = 1, out=None, quick: bool = False, seed: int = 0) -> RunReport:
    """Run the suite named `selector` ("all" runs every suite)"""
    if selector == "all":
        names = list(SUITES)
    elif selector in SUITES:
        names = [selector]
    else:
        raise UnknownSuite(f"no suite named {selector!r}; known: {', '.join(sorted(SUITES))}")
    ctx = SuiteContext(quick=quick, jobs=jobs, seed=seed)
    started = time.perf_counter()
    checks: List[CheckResult] = []
    for name in names:
        logger.info(LOG_MESSAGES["suite_started"].format(name))
        suite_checks = SUITES[name].runner(ctx)
        for check in suite_checks:
            logger.info(LOG_MESSAGES["suite_check"].format(
                check.name, "PASS" if check.passed else "FAIL", check.value, check.threshold))
        logger.info(LOG_MESSAGES["suite_finished"].format(
            name, "passed" if all(c.passed for c in suite_checks) else "failed"))
        checks.extend(suite_checks)
    report = RunReport(
        name=f"suite-{selector}",
        config={"suite": selector, "quick": quick, "jobs": jobs, "seed": seed},
        checks=checks,
        passed=all(c.passed for c in checks),
        wall_clock_s=time.perf_counter() - started,
    )
    if out is not None:
        write_report(out, report)
    return report


def suite_names() -> List[str]:
    return sorted(SUITES)


def describe(selector: str) -> Optional[str]:
    suite = SUITES.get(selector)
    return suite.claim if suite else None
