"""
One step of the Greedy[d] process with random deletions
"""

import logging
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from core.bin_state import BinState
from core.models import DeletionModel, EventKind, StepEvent
from core.randomness import RandomStream
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')


def place_greedy(state: BinState, choices: Sequence[int]) -> int:
    """Put a ball into the first least-loaded bin among `choices`"""
    loads = state.loads
    best = choices[0]
    best_load = loads[best]
    for candidate in choices[1:]:
        if loads[candidate] < best_load:
            best = candidate
            best_load = loads[candidate]
    state.add_ball(best)
    return best


def greedy_insert(state: BinState, rng: RandomStream, d: int = 2) -> StepEvent:
    """Sample d bins with replacement and insert into the least loaded one"""
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    n = state.n
    choices = tuple(rng.randbelow(n) for _ in range(d))
    target = place_greedy(state, choices)
    return StepEvent.insert(target, choices)


def delete_random_bin(state: BinState, rng: RandomStream) -> StepEvent:
    """Remove a ball from a uniformly chosen non-empty bin"""
    if state.total_load == 0:
        logger.debug(LOG_MESSAGES["deletion_noop"])
        return StepEvent.noop()
    index = state.nonempty_index
    target = index.pick(rng.randbelow(len(index)))
    state.remove_ball(target)
    return StepEvent.delete(DeletionModel.BIN, target)


def delete_random_ball(state: BinState, rng: RandomStream) -> StepEvent:
    """Remove a uniformly chosen ball"""
    if state.total_load == 0:
        logger.debug(LOG_MESSAGES["deletion_noop"])
        return StepEvent.noop()
    target = state.load_prefix_tree.sample(rng.randbelow(state.total_load))
    state.remove_ball(target)
    return StepEvent.delete(DeletionModel.BALL, target)


DELETERS = {
    DeletionModel.BIN: delete_random_bin,
    DeletionModel.BALL: delete_random_ball,
}


def step(state: BinState, beta_t: float, rng: RandomStream,
         deletion_model: DeletionModel = DeletionModel.BIN, d: int = 2) -> StepEvent:
    """Insert with probability beta_t, otherwise delete"""
    if rng.random() < beta_t:
        return greedy_insert(state, rng, d)
    return DELETERS[DeletionModel(deletion_model)](state, rng)


def undo_step(state: BinState, event: StepEvent, max_total_load: int) -> None:
    """Revert `event` and restore the recorded history maximum"""
    if event.kind is EventKind.INSERT:
        state.remove_ball(event.bin)
    elif event.kind is not EventKind.NOOP:
        state.add_ball(event.bin)
    state.max_total_load = max_total_load


class StepCounts(NamedTuple):
    inserts: int = 0
    deletions: int = 0
    noops: int = 0

    def __add__(self, other):
        return StepCounts(*(a + b for a, b in zip(self, other)))


def run_steps(state: BinState, betas: np.ndarray, rng: RandomStream,
              deletion_model: DeletionModel = DeletionModel.BIN, d: int = 2,
              events: Optional[List[StepEvent]] = None) -> StepCounts:
    """Apply one step per entry of `betas`"""
    inserts = noops = 0
    deleter = DELETERS[DeletionModel(deletion_model)]
    for beta_t in betas.tolist():
        if rng.random() < beta_t:
            event = greedy_insert(state, rng, d)
            inserts += 1
        else:
            event = deleter(state, rng)
            if event.kind is EventKind.NOOP:
                noops += 1
        if events is not None:
            events.append(event)
    return StepCounts(inserts, len(betas) - inserts - noops, noops)


def rank_insertion_probs(n: int) -> np.ndarray:
    """Probability that sorted rank i (1 = heaviest) receives a Greedy-2 ball

    Ties between equal loads go to the larger rank, giving
    p_i = (i/n)^2 - ((i-1)/n)^2 = (2i - 1) / n^2.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    ranks = np.arange(1, n + 1, dtype=float)
    return (2 * ranks - 1) / (n * n)


def rank_insertion_probs_d(n: int, d: int) -> np.ndarray:
    """Greedy[d] generalization: (i/n)^d - ((i-1)/n)^d"""
    ranks = np.arange(0, n + 1, dtype=float) / n
    return np.diff(ranks ** d)
