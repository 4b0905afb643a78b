"""
Random walks used as oracles: the biased crossing walk and the lazy reflecting walk
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from core.errors import ConfigError, RIsOne
from core.randomness import RandomStream
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')

MIN_CROSSING_TRIALS = 10_000


@dataclass(frozen=True)
class WalkParams:
    D: int = 1
    lazy_alpha: float = 0.0
    r: float = 2.0
    a: int = 1
    b: int = 1

    def __post_init__(self):
        if self.D < 0:
            raise ConfigError(f"D must be non-negative, got {self.D}")
        if not 0 <= self.lazy_alpha < 1:
            raise ConfigError(f"lazy_alpha must lie in [0, 1), got {self.lazy_alpha}")
        if self.r <= 0 or self.r == 1:
            raise ConfigError(f"r must be positive and different from 1, got {self.r}")
        if self.a < 1 or self.b < 1:
            raise ConfigError("crossing boundaries a and b must be positive")


# ============== Biased walk crossing ==============

def biased_rw_cross_prob(r: float, a: int, b: int) -> float:
    """P[walk from 0 reaches +b before -a] = (r^a - 1) / (r^(a+b) - 1)

    The walk steps -1 with probability r/(1+r) and +1 otherwise.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if r == 1:
        raise RIsOne("crossing formula is undefined for r = 1; the symmetric answer is a/(a+b)")
    if a < 1 or b < 1:
        raise ValueError("a and b must be positive integers")
    log_r = math.log(r)
    return math.expm1(a * log_r) / math.expm1((a + b) * log_r)


def simulate_biased_walk_crossing(r: float, a: int, b: int, trials: int, rng: RandomStream) -> float:
    """Fraction of walks from 0 that hit +b before -a"""
    if trials < MIN_CROSSING_TRIALS:
        raise ValueError(f"crossing estimates need at least {MIN_CROSSING_TRIALS} trials, got {trials}")
    down = r / (1 + r)
    positions = np.zeros(trials, dtype=np.int64)
    hits = 0
    while positions.size:
        moves = np.where(rng.uniform_array(positions.size) < down, -1, 1)
        positions += moves
        hits += int(np.count_nonzero(positions >= b))
        positions = positions[(positions < b) & (positions > -a)]
    logger.debug(LOG_MESSAGES["walk_finished"].format("cross", trials))
    return hits / trials


def binomial_se(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


# ============== Lazy reflecting walk ==============

def expected_hit_time(D: int, lazy_alpha: float) -> float:
    """D (D + 1) / (1 - alpha)"""
    return D * (D + 1) / (1 - lazy_alpha)


def reflecting_lazy_walk_hit_time(D: int, lazy_alpha: float, rng: RandomStream) -> int:
    """Steps until the alpha-lazy walk on {0..D} started at D first hits 0

    Each step stays put with probability alpha, otherwise moves -1 or +1
    with equal chance; a +1 move at D is reflected into staying put.
    """
    if D < 1:
        raise ValueError(f"D must be at least 1, got {D}")
    if not 0 <= lazy_alpha < 1:
        raise ValueError(f"lazy_alpha must lie in [0, 1), got {lazy_alpha}")
    half_move = lazy_alpha + (1 - lazy_alpha) / 2
    position, t = D, 0
    while position > 0:
        t += 1
        u = rng.random()
        if u < lazy_alpha:
            continue
        if u < half_move:
            position -= 1
        elif position < D:
            position += 1
    return t


def sample_hit_times(D: int, lazy_alpha: float, trials: int, rng: RandomStream) -> np.ndarray:
    """Vectorized counterpart of reflecting_lazy_walk_hit_time"""
    if D < 1:
        raise ValueError(f"D must be at least 1, got {D}")
    if not 0 <= lazy_alpha < 1:
        raise ValueError(f"lazy_alpha must lie in [0, 1), got {lazy_alpha}")
    half_move = lazy_alpha + (1 - lazy_alpha) / 2
    times = np.zeros(trials, dtype=np.int64)
    index = np.arange(trials)
    positions = np.full(trials, D, dtype=np.int64)
    t = 0
    while index.size:
        t += 1
        u = rng.uniform_array(index.size)
        positions -= (u >= lazy_alpha) & (u < half_move)
        positions += (u >= half_move) & (positions < D)
        done = positions == 0
        times[index[done]] = t
        index, positions = index[~done], positions[~done]
    logger.debug(LOG_MESSAGES["walk_finished"].format("hit", trials))
    return times


def hit_time_expectation_exact(D: int, lazy_alpha: float) -> float:
    """Expected hitting time of 0 from D by solving the first-step equations"""
    if D == 0:
        return 0.0
    move = (1 - lazy_alpha) / 2
    system = np.zeros((D, D))
    rhs = np.ones(D)
    # unknown k-1 is E_k for k = 1..D; E_0 = 0
    for k in range(1, D + 1):
        row = k - 1
        system[row, row] = 1 - lazy_alpha
        if k > 1:
            system[row, row - 1] -= move
        if k < D:
            system[row, row + 1] -= move
        else:
            system[row, row] -= move
    return float(np.linalg.solve(system, rhs)[-1])


class TailCheck(NamedTuple):
    fraction: float
    threshold: float
    reference: float

    @property
    def passed(self) -> bool:
        return self.fraction <= self.reference


def hit_time_tail(samples: np.ndarray, expected: float, n: int, a: float = 1.0,
                  threshold: Optional[float] = None) -> TailCheck:
    """Fraction of hit times at or above 2 E[T] a log2 n, against the n^-a reference"""
    if threshold is None:
        threshold = 2 * expected * a * math.log2(n)
    fraction = float(np.mean(samples >= threshold))
    return TailCheck(fraction, threshold, n ** (-a))
