"""
Pinned empirical thresholds

The bounds checked by the suites are asymptotic and hide their constants.
Each constant the suites compare against is pinned here with the claim it
stands for and how it was obtained. scripts/calibrate.py re-derives them:
median of the measured quantity over CALIBRATION_SEEDS seeds at the
reference n, plus CALIBRATION_MARGIN.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

CALIBRATION_SEEDS = 50
CALIBRATION_MARGIN = 0.5


@dataclass(frozen=True)
class Calibration:
    name: str
    value: float
    claim: str
    procedure: str
    reference_n: Optional[int] = None


def pin_from_samples(values: Iterable[float], margin: float = CALIBRATION_MARGIN) -> float:
    """Median plus a relative margin"""
    return float(np.median(np.asarray(list(values), dtype=float)) * (1 + margin))


CALIBRATIONS: Dict[str, Calibration] = {c.name: c for c in (
    Calibration(
        "adisc_factor", 7.0,
        "max sampled adisc stays below (factor / alpha) * ln n with alpha = beta / 16",
        "median over seeds of max adisc * alpha / ln n, plus margin, rounded up", 2048),
    Calibration(
        "adisc_scaling_margin", 1.5,
        "mean max adisc at n=2048 over n=128 grows at most like ln(2048) / ln(128) times this",
        "fixed margin on the logarithmic growth ratio"),
    Calibration(
        "balls_above_gamma", 8,
        "balls at height >= ceil(m/n) + gamma stay below half of n",
        "smallest gamma whose median count over seeds, plus margin, is below n/2", 2048),
    Calibration(
        "balls_above_fraction", 0.5,
        "fraction of n that the balls above ceil(m/n) + gamma may reach",
        "fixed by the claim"),
    Calibration(
        "sample_coverage", 0.95,
        "share of samples (or seeds) that must satisfy a calibrated bound",
        "fixed"),
    Calibration(
        "overload_additive", 10.0,
        "max overload stays below ln ln n + this constant under fluctuating beta",
        "median over seeds of max overload - ln ln n, plus margin, rounded up", 1024),
    Calibration(
        "lower_bound_divisor", 8.0,
        "bins kept above the floor average through a deletion burst number at least sqrt(n) / divisor",
        "sqrt(n) over the median untouched count, with margin, rounded up", 4096),
    Calibration(
        "floor_fraction", 0.2,
        "fraction of bins at load >= floor(m/n) when the deletion burst starts",
        "median fraction over seeds divided by (1 + margin), rounded down", 4096),
    Calibration(
        "coupling_constant", 1.0,
        "coupled copies one ball apart meet within constant * n^3 ln^3 n steps",
        "fixed generous constant; measured meeting times are reported", 64),
    Calibration(
        "walk_relative_error", 0.02,
        "sample mean of the lazy walk hitting time within this relative error",
        "fixed tolerance at 10^5 trials"),
    Calibration(
        "se_multiplier", 3.0,
        "Monte-Carlo estimates agree with their oracle within this many standard errors",
        "fixed"),
    Calibration(
        "chi_square_significance", 1e-3,
        "goodness-of-fit significance of sampling-law checks",
        "fixed"),
    Calibration(
        "drift_trials", 400_000,
        "one-step trials on the engineered state with one bin 20 above and one 20 below average",
        "smallest power-of-two multiple of 10^5 at which the exact drift at alpha = epsilon beta / 3 "
        "sits at least 7 SE below zero", 64),
    Calibration(
        "prefill_alpha", 1 / 16,
        "exponent used for the Gamma / n sanity value after the heavy prefill",
        "beta / 16 with beta = 1"),
)}


def value(name: str) -> float:
    return CALIBRATIONS[name].value
