"""
Coupled copies of the process on one shared random stream

Both copies see the same insert/delete coin, the same sampled ranks for
insertion and the same uniform z for deletion. Ranks refer to the
rank-sorted view (rank 1 = fullest bin); a chosen rank is realized on a
concrete bin picked uniformly among the bins holding that rank's load.
Draws are made in a fixed order: coin, ranks or z, then X's bin, then Y's.
"""

import logging
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from itertools import accumulate
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.bin_state import BinState
from core.errors import TotalLoadMismatch
from core.models import DeletionModel, StepEvent
from core.randomness import RandomStream
from core.schedules import Schedule
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')


def _sorted_pair(x: Sequence[int], y: Sequence[int]) -> Tuple[List[int], List[int]]:
    xs = sorted(x, reverse=True)
    ys = sorted(y, reverse=True)
    if len(xs) != len(ys):
        raise ValueError(f"load vectors differ in length: {len(xs)} != {len(ys)}")
    if sum(xs) != sum(ys):
        raise TotalLoadMismatch(f"total loads differ: {sum(xs)} != {sum(ys)}")
    return xs, ys


def transformation_distance(x: Sequence[int], y: Sequence[int]) -> int:
    """Minimum number of ball moves turning sorted x into sorted y"""
    xs, ys = _sorted_pair(x, y)
    return int(sum(a - b for a, b in zip(xs, ys) if a > b))


def _prefix_dominates(xs: Sequence[int], ys: Sequence[int]) -> bool:
    sx = sy = 0
    for a, b in zip(xs, ys):
        sx += a
        sy += b
        if sy > sx:
            return False
    return True


def majorizes(x: Sequence[int], y: Sequence[int]) -> bool:
    """S_k(y) <= S_k(x) for every k on the sorted vectors"""
    xs, ys = _sorted_pair(x, y)
    return _prefix_dominates(xs, ys)


def deletion_rank(sorted_loads: Sequence[int], z: float, model: DeletionModel) -> Tuple[int, int]:
    """(rank, ball number) deleted for the shared uniform z

    Ball deletion takes ball i = floor(z m) + 1 in left-to-right numbering.
    Bin deletion takes bin l = floor(z n_hat) + 1 among the n_hat non-empty
    bins and slot k = floor((z - (l-1)/n_hat) n_hat x_l) + 1 inside it.
    """
    prefix = list(accumulate(sorted_loads))
    total = prefix[-1] if prefix else 0
    if total == 0:
        raise ValueError("no ball to delete")
    if DeletionModel(model) is DeletionModel.BALL:
        ball = min(int(z * total) + 1, total)
        return bisect_left(prefix, ball) + 1, ball
    nonempty = sum(1 for x in sorted_loads if x > 0)
    rank = min(int(z * nonempty) + 1, nonempty)
    load = sorted_loads[rank - 1]
    slot = int((z - (rank - 1) / nonempty) * nonempty * load) + 1
    slot = min(max(slot, 1), load)
    before = prefix[rank - 2] if rank > 1 else 0
    return rank, before + slot


def _raise_at_rank(sorted_loads: List[int], rank: int) -> None:
    """Add a ball at 1-based `rank`, keeping the list non-increasing"""
    load = sorted_loads[rank - 1]
    sorted_loads[sorted_loads.index(load)] = load + 1


def _lower_at_rank(sorted_loads: List[int], rank: int) -> None:
    """Remove a ball at 1-based `rank`, keeping the list non-increasing"""
    load = sorted_loads[rank - 1]
    last = rank - 1
    while last + 1 < len(sorted_loads) and sorted_loads[last + 1] == load:
        last += 1
    sorted_loads[last] = load - 1


def _bin_at_rank(state: BinState, sorted_loads: Sequence[int], rank: int, rng: RandomStream) -> int:
    candidates = state.bins_with_load(sorted_loads[rank - 1])
    return candidates[rng.randbelow(len(candidates))]


@dataclass
class CoupledPair:
    state_x: BinState
    state_y: BinState
    shared_rng: RandomStream
    step_count: int = 0
    x_model: DeletionModel = DeletionModel.BIN
    y_model: DeletionModel = DeletionModel.BALL
    d: int = 2

    def __post_init__(self):
        if self.state_x.n != self.state_y.n:
            raise ValueError("coupled states need the same number of bins")
        if self.state_x.total_load != self.state_y.total_load:
            raise TotalLoadMismatch("coupled states need the same total load")

    @property
    def distance(self) -> int:
        return transformation_distance(self.state_x.loads, self.state_y.loads)

    @property
    def x_majorizes_y(self) -> bool:
        return majorizes(self.state_x.loads, self.state_y.loads)


def coupled_step(pair: CoupledPair, beta_t: float) -> Tuple[StepEvent, StepEvent]:
    """Advance both copies by one step on shared randomness

    Coupled insert events record only the realized bin as their choice.
    """
    rng = pair.shared_rng
    x, y = pair.state_x, pair.state_y
    pair.step_count += 1
    if rng.random() < beta_t:
        n = x.n
        # least loaded among sampled ranks is the largest rank
        rank = max(rng.randbelow(n) for _ in range(pair.d)) + 1
        x_bin = _bin_at_rank(x, x.sorted_loads(), rank, rng)
        y_bin = _bin_at_rank(y, y.sorted_loads(), rank, rng)
        x.add_ball(x_bin)
        y.add_ball(y_bin)
        return StepEvent.insert(x_bin, (x_bin,)), StepEvent.insert(y_bin, (y_bin,))
    if x.total_load == 0:
        return StepEvent.noop(), StepEvent.noop()
    z = rng.random()
    x_sorted, y_sorted = x.sorted_loads(), y.sorted_loads()
    x_rank, _ = deletion_rank(x_sorted, z, pair.x_model)
    y_rank, _ = deletion_rank(y_sorted, z, pair.y_model)
    x_bin = _bin_at_rank(x, x_sorted, x_rank, rng)
    y_bin = _bin_at_rank(y, y_sorted, y_rank, rng)
    x.remove_ball(x_bin)
    y.remove_ball(y_bin)
    return StepEvent.delete(pair.x_model, x_bin), StepEvent.delete(pair.y_model, y_bin)


# ============== Experiments ==============

@dataclass
class MajorizationResult:
    steps: int
    violations: int = 0
    first_violation: Optional[int] = None
    final_x: List[int] = field(default_factory=list)
    final_y: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def majorization_experiment(n: int, steps: int, schedule: Schedule, rng: RandomStream, d: int = 2,
                            x_model: DeletionModel = DeletionModel.BIN,
                            y_model: DeletionModel = DeletionModel.BALL) -> MajorizationResult:
    """Random-bin deletion copy X against random-ball deletion copy Y, both from empty

    Runs on the rank-sorted views only. Which concrete bin realizes a rank
    does not change either sorted vector, so no bin draws are made; coins,
    ranks and z values are drawn up front, one vector each.
    """
    xs, ys = [0] * n, [0] * n
    total = 0
    result = MajorizationResult(steps)
    betas = schedule.values(1, steps).tolist()
    coins = rng.uniform_array(steps).tolist()
    # least loaded among sampled ranks is the largest rank
    ranks = np.minimum((rng.uniform_array((steps, d)) * n).astype(np.int64).max(axis=1) + 1, n).tolist()
    zs = rng.uniform_array(steps).tolist()
    for t in range(steps):
        if coins[t] < betas[t]:
            _raise_at_rank(xs, ranks[t])
            _raise_at_rank(ys, ranks[t])
            total += 1
        elif total:
            _lower_at_rank(xs, deletion_rank(xs, zs[t], x_model)[0])
            _lower_at_rank(ys, deletion_rank(ys, zs[t], y_model)[0])
            total -= 1
        else:
            continue
        if not _prefix_dominates(xs, ys):
            result.violations += 1
            if result.first_violation is None:
                result.first_violation = t + 1
                logger.warning(LOG_MESSAGES["majorization_violation"].format(t + 1))
    result.final_x, result.final_y = xs, ys
    return result


def default_max_steps(n: int) -> int:
    return math.ceil(4 * n ** 3 * math.log(n) ** 3)


@dataclass
class CouplingResult:
    coupled_at: Optional[int]
    max_steps: int
    start_distance: int
    trace: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def timed_out(self) -> bool:
        return self.coupled_at is None


def coupling_time_experiment(x0: Sequence[int], y0: Sequence[int], schedule: Schedule,
                             deletion_model: DeletionModel, rng: RandomStream,
                             max_steps: Optional[int] = None, trace_every: int = 0,
                             d: int = 2) -> CouplingResult:
    """First step at which two copies of the same process coincide (as sorted vectors)"""
    start = transformation_distance(x0, y0)
    n = len(x0)
    if max_steps is None:
        max_steps = default_max_steps(n)
    result = CouplingResult(None, max_steps, start)
    if trace_every:
        result.trace.append((0, start))
    if start == 0:
        result.coupled_at = 0
        return result
    model = DeletionModel(deletion_model)
    pair = CoupledPair(BinState(x0), BinState(y0), rng, x_model=model, y_model=model, d=d)
    for t in range(1, max_steps + 1):
        coupled_step(pair, schedule.beta(t))
        distance = pair.distance
        if trace_every and t % trace_every == 0:
            result.trace.append((t, distance))
        if distance == 0:
            result.coupled_at = t
            logger.debug(LOG_MESSAGES["coupling_met"].format(t))
            return result
    logger.warning(LOG_MESSAGES["coupling_timeout"].format(max_steps))
    return result


def distance_trace(x0: Sequence[int], y0: Sequence[int], schedule: Schedule,
                   deletion_model: DeletionModel, rng: RandomStream, steps: int, d: int = 2) -> np.ndarray:
    """Delta(t) for t = 0..steps without stopping at the meeting time"""
    model = DeletionModel(deletion_model)
    pair = CoupledPair(BinState(x0), BinState(y0), rng, x_model=model, y_model=model, d=d)
    trace = np.empty(steps + 1, dtype=np.int64)
    trace[0] = pair.distance
    for t in range(1, steps + 1):
        coupled_step(pair, schedule.beta(t))
        trace[t] = pair.distance
    return trace


@dataclass
class DistanceWindow:
    start: int
    end: int
    active: int
    moved: int
    mean_change: float
    std_err: float


def distance_windows(traces: np.ndarray) -> List[DistanceWindow]:
    """Change of Delta over the windows [0, 1), [1, 2), [2, 4), ... of each trace

    Only runs with Delta(start) > 0 enter a window; a met pair stays met,
    so the rest would only add zero changes.
    """
    steps = traces.shape[1] - 1
    bounds = [0] + [2 ** k for k in range(steps.bit_length()) if 2 ** k <= steps]
    if bounds[-1] != steps:
        bounds.append(steps)
    windows = []
    for start, end in zip(bounds, bounds[1:]):
        active = traces[:, start] > 0
        changes = (traces[active, end] - traces[active, start]).astype(float)
        count = int(changes.size)
        std_err = float(changes.std(ddof=1) / math.sqrt(count)) if count > 1 else math.inf
        mean = float(changes.mean()) if count else 0.0
        windows.append(DistanceWindow(start, end, count, int(np.count_nonzero(changes)), mean, std_err))
    return windows
