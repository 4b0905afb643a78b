import math
from collections import Counter
from itertools import product

import numpy as np
import pytest

from core.bin_state import BinState
from core.models import DeletionModel, EventKind
from core.process import (
    StepCounts, delete_random_ball, delete_random_bin, greedy_insert, place_greedy,
    rank_insertion_probs, rank_insertion_probs_d, run_steps, step, undo_step,
)
from core.randomness import RandomStream


@pytest.mark.parametrize("loads, choices, expected", [
    ([3, 1], (0, 1), [3, 2]),
    ([2, 2], (0, 1), [3, 2]),
    ([2, 2], (1, 0), [2, 3]),
    ([0, 0, 0, 0], (2,), [0, 0, 1, 0]),
])
def test_place_greedy(loads, choices, expected):
    state = BinState(loads)
    place_greedy(state, choices)
    assert state.loads == expected


def test_greedy_insert_records_choices(rng):
    state = BinState.empty(8)
    event = greedy_insert(state, rng, d=3)
    assert event.kind is EventKind.INSERT
    assert len(event.choices) == 3
    assert event.bin in event.choices
    assert state.total_load == 1


def test_greedy_insert_rejects_zero_choices(rng):
    with pytest.raises(ValueError):
        greedy_insert(BinState.empty(4), rng, d=0)


def test_deletions_on_empty_system_are_noops(rng):
    state = BinState.empty(2)
    assert delete_random_bin(state, rng).kind is EventKind.NOOP
    assert delete_random_ball(state, rng).kind is EventKind.NOOP
    assert state.loads == [0, 0]


def test_bin_deletion_is_uniform_over_nonempty_bins():
    rng = RandomStream(21)
    hits = Counter()
    for _ in range(4000):
        state = BinState([5, 0, 3])
        hits[delete_random_bin(state, rng).bin] += 1
    assert set(hits) == {0, 2}
    assert abs(hits[0] / 4000 - 0.5) < 0.05


def test_ball_deletion_is_proportional_to_load():
    rng = RandomStream(22)
    hits = Counter()
    for _ in range(4000):
        state = BinState([3, 1])
        hits[delete_random_ball(state, rng).bin] += 1
    assert abs(hits[0] / 4000 - 0.75) < 0.05


def test_ball_deletion_single_nonempty_bin(rng):
    state = BinState([0, 7])
    assert all(delete_random_ball(state.copy(), rng).bin == 1 for _ in range(50))


def test_step_with_certain_insertion(rng):
    state = BinState.empty(4)
    events = [step(state, 1.0, rng) for _ in range(4)]
    assert all(e.kind is EventKind.INSERT for e in events)
    assert state.total_load == 4


def test_step_with_zero_beta_on_empty_system(rng):
    state = BinState.empty(4)
    assert all(step(state, 0.0, rng).kind is EventKind.NOOP for _ in range(10))


def test_insert_fraction_matches_beta():
    steps = 100_000
    state = BinState.balanced(64, 64 * 200)
    counts = run_steps(state, np.full(steps, 0.6), RandomStream(5), DeletionModel.BALL)
    assert counts.noops == 0
    se = math.sqrt(0.6 * 0.4 / steps)
    assert abs(counts.inserts / steps - 0.6) < 5 * se
    assert state.total_load == 64 * 200 + counts.inserts - counts.deletions
    state.verify_coherence()


def test_run_steps_matches_single_steps():
    betas = np.full(2000, 0.5)
    a, b = BinState.empty(16), BinState.empty(16)
    events = []
    run_steps(a, betas, RandomStream(8), events=events)
    rng = RandomStream(8)
    single = [step(b, beta, rng) for beta in betas]
    assert a == b
    assert events == single


def test_undo_step_restores_state(rng):
    state = BinState([4, 1, 0, 2], max_total_load=9)
    before = state.copy()
    for _ in range(200):
        event = step(state, 0.5, rng, DeletionModel.BALL)
        undo_step(state, event, before.max_total_load)
        assert state == before
    state.verify_coherence()


def test_step_counts_add():
    assert StepCounts(1, 2, 3) + StepCounts(4, 5, 6) == StepCounts(5, 7, 9)


def test_rank_insertion_probs_small():
    assert np.allclose(rank_insertion_probs(4), [1 / 16, 3 / 16, 5 / 16, 7 / 16])
    assert np.allclose(rank_insertion_probs(1), [1.0])
    assert rank_insertion_probs(100).sum() == pytest.approx(1.0)


def test_rank_insertion_probs_by_enumeration():
    n = 5
    loads = [9, 7, 5, 3, 1]
    counts = Counter()
    for a, b in product(range(n), repeat=2):
        state = BinState(loads)
        counts[place_greedy(state, (a, b))] += 1
    observed = [counts[i] / n ** 2 for i in range(n)]
    assert np.allclose(observed, rank_insertion_probs(n))


def test_rank_insertion_probs_d_reduces_to_two_choices():
    assert np.allclose(rank_insertion_probs_d(7, 2), rank_insertion_probs(7))
    assert rank_insertion_probs_d(7, 3).sum() == pytest.approx(1.0)
