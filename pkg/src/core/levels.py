"""
Balance statistics and the level structure above the base height

measure() turns a BinState into a MetricsSample. The rest of the module
builds the critical thresholds alpha_0 .. alpha_{l*+1}, classifies the
levels of a configuration against them and checks schedules for c-good
intervals.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from core.bin_state import BinState
from core.errors import DegenerateN
from core.models import LevelStatus, MetricsSample
from core.potentials import gamma_potential
from core.schedules import Schedule
from utils.helpers import ceil_div
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')

SANDWICH_RTOL = 1e-9
CGOOD_TOL = 1e-12


# ============== Statistics ==============

def balls_at_or_above(state: BinState, h: int) -> int:
    """Number of balls at height >= h (heights are 1-based within a bin)"""
    if h <= 0:
        return state.total_load
    return sum(count * (load - h + 1) for load, count in state.load_histogram.items() if load >= h)


def bins_at_or_above(state: BinState, load: int) -> int:
    return sum(count for value, count in state.load_histogram.items() if value >= load)


def base_height(state: BinState, gamma: int) -> int:
    return ceil_div(state.max_total_load, state.n) + gamma


def measure(state: BinState, t: int = 0, alpha: Optional[float] = None,
            gamma: Optional[int] = None, thresholds: Optional["Thresholds"] = None,
            seed: Optional[int] = None) -> MetricsSample:
    """Snapshot of the balance statistics of `state`"""
    n, m = state.n, state.total_load
    average = m / n
    x_max, x_min = state.max_load, state.min_load
    disc = x_max - average
    sample = MetricsSample(
        t=t,
        m=m,
        m_max=state.max_total_load,
        x_max=x_max,
        x_min=x_min,
        disc=disc,
        adisc=max(disc, average - x_min),
        overload=x_max - state.max_total_load / n,
        seed=seed,
    )
    if alpha is not None:
        sample.gamma_potential = gamma_potential(state, alpha)
    if gamma is not None:
        sample.balls_above_gamma = balls_at_or_above(state, ceil_div(m, n) + gamma)
    if thresholds is not None:
        sample.level_statuses = classify_levels(state, base_height(state, thresholds.gamma), thresholds)
    return sample


# ============== Critical thresholds ==============

@dataclass(frozen=True)
class Thresholds:
    n: int
    beta_hat: float
    gamma: int
    alphas: Tuple[float, ...]
    ell_star: int
    sandwich_violations: Tuple[int, ...] = ()

    @property
    def level_count(self) -> int:
        return self.ell_star + 2

    @property
    def log_log_reference(self) -> float:
        """log2 log2 n, the scale the number of levels is compared with"""
        return math.log2(math.log2(self.n))

    def table(self) -> List[Tuple[int, float, float, bool]]:
        """(level, alpha, alpha/2, sandwich ok) rows"""
        return [(level, alpha, alpha / 2, level not in self.sandwich_violations)
                for level, alpha in enumerate(self.alphas)]


def _sandwich_holds(previous: float, current: float, n: int, beta_hat: float) -> bool:
    lower = 8 * beta_hat / (1 - beta_hat) * previous * previous / n
    upper = previous / 4
    return lower <= current * (1 + SANDWICH_RTOL) and current <= upper * (1 + SANDWICH_RTOL)


def build_thresholds(n: int, beta_hat: float, gamma: int = 1) -> Thresholds:
    """Critical thresholds for n bins and supremum insertion probability beta_hat"""
    if not 0 < beta_hat < 1:
        raise ValueError(f"beta_hat must lie in (0, 1), got {beta_hat}")
    if n < 2:
        raise DegenerateN(f"n={n} is too small for the threshold recursion")
    log_n = math.log(n)
    ratio = (1 - beta_hat) / beta_hat
    alpha_0 = ratio / 128 * n
    last_recursive = 12 * log_n
    if alpha_0 <= last_recursive:
        raise DegenerateN(
            f"alpha_0={alpha_0:.3f} <= 12 ln n={last_recursive:.3f} for n={n}, beta_hat={beta_hat}")
    cutoff = math.sqrt(1.5 * ratio * n * log_n)

    alphas = [alpha_0]
    while alphas[-1] > cutoff:
        alphas.append(32 / ratio * alphas[-1] ** 2 / n)
    ell_star = len(alphas)
    alphas.extend([last_recursive, 24.0])

    violations = tuple(
        level for level in range(1, len(alphas))
        if not _sandwich_holds(alphas[level - 1], alphas[level], n, beta_hat)
    )
    for level in violations:
        logger.warning(LOG_MESSAGES["sandwich_violation"].format(level, n, beta_hat))
    logger.debug(LOG_MESSAGES["thresholds_built"].format(n, beta_hat, len(alphas), ell_star))
    return Thresholds(n, beta_hat, gamma, tuple(alphas), ell_star, violations)


def classify_levels(state: BinState, base: int, thresholds: Thresholds) -> List[LevelStatus]:
    """Safe / Critical / Invalid per level, on half-open intervals"""
    statuses = []
    for level, alpha in enumerate(thresholds.alphas):
        count = balls_at_or_above(state, base + level)
        if count < alpha / 2:
            statuses.append(LevelStatus.SAFE)
        elif count < alpha:
            statuses.append(LevelStatus.CRITICAL)
        else:
            statuses.append(LevelStatus.INVALID)
    return statuses


# ============== Level transitions ==============

Probability = Union[float, Fraction]


class LevelStepProbs(NamedTuple):
    p_up: Probability
    p_down_lb: Probability


def level_step_probs(state: BinState, h: int, beta_t: Probability, exact: bool = False) -> LevelStepProbs:
    """Chance that m_h grows in one step, and a lower bound on the chance it shrinks

    A ball lands at height >= h iff both choices hold >= h-1 balls, which for
    h >= 2 is the m_{h-1} - m_h bins; a random-bin deletion lowers m_h when it
    hits one of the m_h - m_{h+1} bins holding >= h balls.
    """
    if h < 1:
        raise ValueError(f"h must be at least 1, got {h}")
    n = state.n
    eligible = bins_at_or_above(state, h - 1)
    tall = bins_at_or_above(state, h)
    if exact:
        beta = Fraction(beta_t)
        return LevelStepProbs(beta * Fraction(eligible, n) ** 2, (1 - beta) * Fraction(tall, n))
    return LevelStepProbs(beta_t * (eligible / n) ** 2, (1 - beta_t) * tall / n)


# ============== c-good intervals ==============

@dataclass(frozen=True)
class CGoodResult:
    good: bool
    sub_t1: Optional[int] = None
    sub_t2: Optional[int] = None
    mean: Optional[float] = None

    def __str__(self) -> str:
        if self.good:
            return "Good"
        return f"Violation(({self.sub_t1}, {self.sub_t2}], mean={self.mean:.6f})"


def check_c_good(schedule: Schedule, interval: Tuple[int, int], c: int, epsilon: float, n: int) -> CGoodResult:
    """Is every window of length >= c*n inside (t1, t2] at mean beta >= (1+epsilon)/2?"""
    t1, t2 = interval
    if t2 <= t1 or t1 < 0:
        raise ValueError(f"interval ({t1}, {t2}] is empty")
    if c < 1 or epsilon <= 0:
        raise ValueError("c must be a positive integer and epsilon positive")
    values = schedule.values(t1 + 1, t2)
    window = c * n
    length = t2 - t1
    if length < window:
        result = CGoodResult(True)
    else:
        target = (1 + epsilon) / 2 - CGOOD_TOL
        excess = np.concatenate(([0.0], np.cumsum(values - target)))
        # best start for each end b is the max excess[a] over a <= b - window
        best_start = np.maximum.accumulate(excess[:length - window + 1])
        bad = np.nonzero(excess[window:] < best_start)[0]
        if bad.size == 0:
            result = CGoodResult(True)
        else:
            end = int(bad[0]) + window
            start = int(np.argmax(excess[:end - window + 1]))
            mean = float(values[start:end].mean())
            result = CGoodResult(False, t1 + start, t1 + end, mean)
    logger.debug(LOG_MESSAGES["cgood_result"].format(t1, t2, result))
    return result
