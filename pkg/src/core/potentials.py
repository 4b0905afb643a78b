"""
Exponential potentials and one-step drift of Gamma

All potentials are recomputed from the load histogram, so each call costs
O(number of distinct loads). Exponents above EXPONENT_CAP raise
PotentialOverflow instead of returning infinities.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Tuple

import numpy as np

from core.bin_state import BinState
from core.errors import ConfigError, PotentialOverflow
from core.models import DeletionModel, EventKind
from core.process import step, undo_step
from core.randomness import RandomStream
from utils.helpers import ceil_div
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')

EXPONENT_CAP = 700.0
MIN_DRIFT_TRIALS = 1000
MAX_ENUMERATION = 1 << 20


@dataclass(frozen=True)
class PotentialParams:
    alpha: float
    epsilon: float = 3 / 16
    beta_lb: float = 0.5

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.epsilon <= 3 / 16:
            raise ConfigError(f"epsilon must lie in (0, 3/16], got {self.epsilon}")
        if not 0 < self.beta_lb <= 1:
            raise ConfigError(f"beta lower bound must lie in (0, 1], got {self.beta_lb}")

    @property
    def fits_discrepancy_bound(self) -> bool:
        return self.alpha <= self.beta_lb / 16

    @property
    def fits_drift_bound(self) -> bool:
        return self.alpha <= self.epsilon * self.beta_lb / 3

    def require_discrepancy_bound(self) -> "PotentialParams":
        if not self.fits_discrepancy_bound:
            raise ConfigError(f"alpha={self.alpha} exceeds beta/16={self.beta_lb / 16}")
        return self

    def require_drift_bound(self) -> "PotentialParams":
        if not self.fits_drift_bound:
            raise ConfigError(
                f"alpha={self.alpha} exceeds epsilon*beta/3={self.epsilon * self.beta_lb / 3}")
        return self


def _histogram_arrays(state: BinState) -> Tuple[np.ndarray, np.ndarray]:
    hist = state.load_histogram
    loads = np.fromiter(hist.keys(), dtype=float, count=len(hist))
    counts = np.fromiter(hist.values(), dtype=float, count=len(hist))
    return loads, counts


def _exp_sum(exponents: np.ndarray, counts: np.ndarray) -> float:
    peak = float(np.max(exponents))
    if peak > EXPONENT_CAP:
        logger.error(LOG_MESSAGES["potential_overflow"].format(peak, EXPONENT_CAP))
        raise PotentialOverflow(f"exponent {peak:.2f} exceeds {EXPONENT_CAP}")
    return float(np.dot(counts, np.exp(exponents)))


def phi(state: BinState, alpha: float) -> float:
    """Sum over bins of exp(alpha * (x_i - m/n))"""
    loads, counts = _histogram_arrays(state)
    return _exp_sum(alpha * (loads - state.average), counts)


phi_signed = phi


def psi(state: BinState, alpha: float) -> float:
    """Sum over bins of exp(-alpha * (x_i - m/n))"""
    loads, counts = _histogram_arrays(state)
    return _exp_sum(-alpha * (loads - state.average), counts)


def gamma_potential(state: BinState, alpha: float) -> float:
    loads, counts = _histogram_arrays(state)
    y = alpha * (loads - state.average)
    return _exp_sum(y, counts) + _exp_sum(-y, counts)


def excess_loads(state: BinState) -> Tuple[np.ndarray, np.ndarray]:
    """(max(0, x_i - ceil(m/n)), count) per distinct load"""
    loads, counts = _histogram_arrays(state)
    return np.maximum(0.0, loads - ceil_div(state.total_load, state.n)), counts


def phi_clipped(state: BinState, alpha: float) -> float:
    """Sum over bins of exp(alpha * X_i+), zero-excess bins counting 1"""
    excess, counts = excess_loads(state)
    return _exp_sum(alpha * excess, counts)


def ball_potential_sum(state: BinState, alpha: float) -> float:
    """Sum of per-ball potentials over balls above ceil(m/n)

    The first ball above the average height carries e^alpha, the ball at
    relative height k > 1 carries e^(alpha k) - e^(alpha (k-1)).
    """
    ceiling = ceil_div(state.total_load, state.n)
    peak = alpha * max(0, state.max_load - ceiling)
    if peak > EXPONENT_CAP:
        logger.error(LOG_MESSAGES["potential_overflow"].format(peak, EXPONENT_CAP))
        raise PotentialOverflow(f"exponent {peak:.2f} exceeds {EXPONENT_CAP}")
    total = 0.0
    for load, count in state.load_histogram.items():
        bin_sum = 0.0
        for relative in range(1, load - ceiling + 1):
            if relative == 1:
                bin_sum += math.exp(alpha)
            else:
                bin_sum += math.exp(alpha * relative) - math.exp(alpha * (relative - 1))
        total += count * bin_sum
    return total


# ============== Drift ==============

class DriftEstimate(NamedTuple):
    mean: float
    std_err: float
    trials: int


def drift_estimate(state: BinState, beta_t: float, alpha: float, trials: int, rng: RandomStream,
                   deletion_model: DeletionModel = DeletionModel.BIN, d: int = 2) -> DriftEstimate:
    """Monte-Carlo estimate of E[Gamma(x') - Gamma(x)] from the frozen state x

    Every trial steps a private copy once and reverts it, so all trials
    start from the same configuration.
    """
    if trials < MIN_DRIFT_TRIALS:
        raise ValueError(f"drift estimates need at least {MIN_DRIFT_TRIALS} trials, got {trials}")
    work = state.copy()
    base = gamma_potential(work, alpha)
    history_max = work.max_total_load
    # Gamma after one move depends only on (direction, old load of the touched bin)
    seen: Dict[Tuple[int, int], float] = {}
    deltas = np.empty(trials)
    for k in range(trials):
        event = step(work, beta_t, rng, deletion_model, d)
        if event.kind is EventKind.NOOP:
            deltas[k] = 0.0
            continue
        key = (event.load_delta, work.loads[event.bin] - event.load_delta)
        if key not in seen:
            seen[key] = gamma_potential(work, alpha) - base
        deltas[k] = seen[key]
        undo_step(work, event, history_max)
    mean = float(deltas.mean())
    std_err = float(deltas.std(ddof=1) / math.sqrt(trials))
    logger.debug(LOG_MESSAGES["drift_estimated"].format(trials, mean, std_err))
    return DriftEstimate(mean, std_err, trials)


def expected_drift(state: BinState, beta_t: float, alpha: float,
                   deletion_model: DeletionModel = DeletionModel.BIN, d: int = 2) -> float:
    """Exact E[Gamma(x') - Gamma(x)] by enumerating every choice tuple and deletion target"""
    n = state.n
    if n ** d > MAX_ENUMERATION:
        raise ValueError(f"enumerating {n}^{d} choice tuples is too large")
    work = state.copy()
    history_max = work.max_total_load
    base = gamma_potential(work, alpha)

    # Gamma after the move depends only on the load of the touched bin
    after_insert = {}
    after_delete = {}
    for bin_id, load in enumerate(state.loads):
        if load not in after_insert:
            work.add_ball(bin_id)
            after_insert[load] = gamma_potential(work, alpha) - base
            work.remove_ball(bin_id)
            work.max_total_load = history_max
        if load > 0 and load not in after_delete:
            work.remove_ball(bin_id)
            after_delete[load] = gamma_potential(work, alpha) - base
            work.add_ball(bin_id)
            work.max_total_load = history_max

    loads = state.loads
    insert_sum = 0.0
    for choices in itertools.product(range(n), repeat=d):
        target = min(choices, key=lambda i: loads[i])
        insert_sum += after_insert[loads[target]]
    insert_part = insert_sum / n ** d

    delete_part = 0.0
    if state.total_load > 0:
        nonempty = [x for x in loads if x > 0]
        if DeletionModel(deletion_model) is DeletionModel.BIN:
            delete_part = sum(after_delete[x] for x in nonempty) / len(nonempty)
        else:
            delete_part = sum(x * after_delete[x] for x in nonempty) / state.total_load
    return beta_t * insert_part + (1 - beta_t) * delete_part
