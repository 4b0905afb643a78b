"""
Calibration script
Re-derives the pinned thresholds of core/calibration.py: median over
CALIBRATION_SEEDS seeds at the reference n, plus CALIBRATION_MARGIN
"""
import argparse
import logging
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

import numpy as np
from tabulate import tabulate

from core.calibration import CALIBRATIONS, CALIBRATION_MARGIN, CALIBRATION_SEEDS, pin_from_samples
from core.experiments import lower_bound_experiment, run_simulation
from core.levels import balls_at_or_above
from core.models import ExperimentConfig
from core.bin_state import BinState
from core.process import run_steps
from core.randomness import RandomStream
from core.schedules import ConstantSchedule, UniformNoiseSchedule
from utils.helpers import ceil_div
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')


def calibrate_overload(n, seeds, jobs):
    config = ExperimentConfig(name="calibrate-overload", n=n, steps=n * n, seeds_count=seeds,
                              schedule=UniformNoiseSchedule(0.4, 0.7), initial_load=10 * n,
                              sample_every=n, jobs=jobs)
    result = run_simulation(config, progress=True)
    values = [s.max_overload - math.log(math.log(n)) for s in result.report.seeds]
    return np.median(values), math.ceil(pin_from_samples(values))


def _constant_beta_runs(n, seeds, jobs):
    config = ExperimentConfig(name="calibrate-discrepancy", n=n, steps=int(200 * n * math.log(n)),
                              seeds_count=seeds, schedule=ConstantSchedule(0.6), sample_every=n, jobs=jobs)
    return run_simulation(config, progress=True)


def calibrate_adisc(result, n):
    alpha = 0.6 / 16
    values = [s.max_adisc * alpha / math.log(n) for s in result.report.seeds]
    return np.median(values), math.ceil(pin_from_samples(values))


def calibrate_gamma(n, seeds):
    """Smallest gamma whose pinned count of balls above ceil(m/n) + gamma is below n/2"""
    steps = int(200 * n * math.log(n))
    counts = {gamma: [] for gamma in range(16)}
    for seed in range(seeds):
        state = BinState.empty(n)
        run_steps(state, np.full(steps, 0.6), RandomStream(seed))
        ceiling = ceil_div(state.total_load, n)
        for gamma in counts:
            counts[gamma].append(balls_at_or_above(state, ceiling + gamma))
    for gamma in sorted(counts):
        if pin_from_samples(counts[gamma]) <= n / 2:
            return float(np.median(counts[gamma])), gamma
    return float(np.median(counts[max(counts)])), max(counts)


def calibrate_lower_bound(n, seeds, jobs):
    result = lower_bound_experiment(n, 0.1, seeds=seeds, jobs=jobs)
    median_untouched = float(np.median(result.untouched_counts))
    divisor = math.ceil(math.sqrt(n) / (median_untouched / (1 + CALIBRATION_MARGIN)))
    median_fraction = float(np.median(result.start_fractions))
    fraction = math.floor(median_fraction / (1 + CALIBRATION_MARGIN) * 10) / 10
    return (median_untouched, divisor), (median_fraction, fraction)


def main():
    parser = argparse.ArgumentParser(description="Re-derive pinned calibration constants")
    parser.add_argument("--seeds", type=int, default=CALIBRATION_SEEDS)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--scale", type=float, default=1.0, help="multiply every reference n (smoke runs)")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format='%(asctime)s [%(levelname)s] %(message)s',
                        datefmt='%Y-%m-%d %H:%M:%S')

    def ref(name):
        return max(16, int(CALIBRATIONS[name].reference_n * args.scale))

    rows = []

    n = ref("overload_additive")
    median, pinned = calibrate_overload(n, args.seeds, args.jobs)
    rows.append(("overload_additive", n, median, pinned, CALIBRATIONS["overload_additive"].value))

    n = ref("adisc_factor")
    runs = _constant_beta_runs(n, args.seeds, args.jobs)
    median, pinned = calibrate_adisc(runs, n)
    rows.append(("adisc_factor", n, median, pinned, CALIBRATIONS["adisc_factor"].value))

    n = ref("balls_above_gamma")
    median, pinned = calibrate_gamma(n, args.seeds)
    rows.append(("balls_above_gamma", n, median, pinned, CALIBRATIONS["balls_above_gamma"].value))

    n = ref("lower_bound_divisor")
    (untouched, divisor), (fraction, pinned_fraction) = calibrate_lower_bound(n, args.seeds, args.jobs)
    rows.append(("lower_bound_divisor", n, untouched, divisor, CALIBRATIONS["lower_bound_divisor"].value))
    rows.append(("floor_fraction", n, fraction, pinned_fraction, CALIBRATIONS["floor_fraction"].value))

    for name, _, median, pinned, _ in rows:
        logger.info(LOG_MESSAGES["calibration_value"].format(name, median, pinned))
    print(tabulate(rows, headers=["constant", "n", "median", "re-derived", "pinned"]))


if __name__ == "__main__":
    main()
