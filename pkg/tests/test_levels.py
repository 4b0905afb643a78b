import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from core.bin_state import BinState
from core.errors import DegenerateN
from core.levels import (
    balls_at_or_above, base_height, build_thresholds, check_c_good, classify_levels,
    level_step_probs, measure,
)
from core.models import LevelStatus
from core.process import place_greedy
from core.schedules import ConstantSchedule, ExplicitSchedule, explicit_from_blocks


def test_measure_balanced():
    sample = measure(BinState.balanced(8, 16))
    assert sample.disc == 0 and sample.adisc == 0 and sample.overload == 0


def test_measure_hand_example():
    sample = measure(BinState([4, 2, 2, 2]), t=7)
    assert sample.t == 7
    assert (sample.m, sample.m_max, sample.x_max, sample.x_min) == (10, 10, 4, 2)
    assert sample.disc == pytest.approx(1.5)
    assert sample.adisc == pytest.approx(1.5)
    assert sample.overload == pytest.approx(1.5)


def test_measure_negative_overload():
    sample = measure(BinState([3, 3, 3, 3], max_total_load=16))
    assert sample.overload == pytest.approx(-1)
    assert sample.disc == 0


def test_measure_adisc_from_underload():
    sample = measure(BinState([2, 2, 2, 0]))
    assert sample.disc == pytest.approx(0.5)
    assert sample.adisc == pytest.approx(1.5)


def test_measure_optional_fields():
    sample = measure(BinState([3, 2, 2, 1]), alpha=0.5, gamma=0,
                     thresholds=build_thresholds(2 ** 16, 0.5))
    assert sample.gamma_potential == pytest.approx(2 * (math.exp(0.5) + math.exp(-0.5)) + 4)
    assert sample.balls_above_gamma == 4
    assert all(status is LevelStatus.SAFE for status in sample.level_statuses)


@pytest.mark.parametrize("loads, h, expected", [
    ([3, 1], 2, 2),
    ([3, 1], 0, 4),
    ([5], 6, 0),
    ([5], 1, 5),
    ([4, 4, 1], 3, 4),
])
def test_balls_at_or_above(loads, h, expected):
    assert balls_at_or_above(BinState(loads), h) == expected


@pytest.mark.parametrize("loads, max_total, gamma, expected", [
    ([0, 0], 0, 1, 1),
    ([3, 3, 2, 2], 10, 2, 5),
    ([2, 2, 2], 6, 0, 2),
])
def test_base_height(loads, max_total, gamma, expected):
    assert base_height(BinState(loads, max_total), gamma) == expected


def test_thresholds_first_and_last_levels():
    n = 2 ** 20
    th = build_thresholds(n, 0.5)
    assert th.alphas[0] == pytest.approx(n / 128)
    assert th.alphas[-1] == 24
    assert th.alphas[-2] == pytest.approx(12 * math.log(n))
    assert len(th.alphas) == th.level_count == th.ell_star + 2
    assert abs(th.level_count - th.log_log_reference) <= 2


@pytest.mark.parametrize("beta_hat", [0.3, 0.5, 0.7])
def test_thresholds_sandwich(beta_hat):
    th = build_thresholds(2 ** 24, beta_hat)
    assert th.sandwich_violations == ()
    assert all(ok for *_, ok in th.table())
    assert all(a > b for a, b in zip(th.alphas, th.alphas[1:]))


def test_thresholds_degenerate_n():
    with pytest.raises(DegenerateN):
        build_thresholds(1024, 0.5)


def test_thresholds_beta_hat_range():
    with pytest.raises(ValueError):
        build_thresholds(2 ** 20, 1.0)


def test_classify_empty_state_is_safe():
    th = build_thresholds(2 ** 20, 0.5)
    statuses = classify_levels(BinState.empty(64), 1, th)
    assert statuses == [LevelStatus.SAFE] * th.level_count


def test_classify_half_open_boundaries():
    th = build_thresholds(2 ** 20, 0.5)
    # put the top level (alpha = 24) at height 1 so it counts every ball
    top = 2 - th.level_count
    critical = classify_levels(BinState([12]), top, th)
    assert critical[-1] is LevelStatus.CRITICAL
    invalid = classify_levels(BinState([24]), top, th)
    assert invalid[-1] is LevelStatus.INVALID
    below = classify_levels(BinState([11]), top, th)
    assert below[-1] is LevelStatus.SAFE


def test_level_step_probs_hand_example():
    probs = level_step_probs(BinState([2, 1, 0, 0]), 2, 0.5)
    assert probs.p_up == pytest.approx(0.125)
    assert probs.p_down_lb == pytest.approx(0.125)


def test_level_step_probs_edges():
    assert level_step_probs(BinState([1, 0, 0]), 3, 0.7).p_up == 0
    assert level_step_probs(BinState([3, 2, 1]), 2, 1.0).p_down_lb == 0


def test_level_step_probs_match_enumeration():
    loads = [3, 2, 2, 1, 0]
    n, h = len(loads), 3
    state = BinState(loads)
    grew = 0
    for pair in product(range(n), repeat=2):
        trial = BinState(loads)
        place_greedy(trial, pair)
        grew += balls_at_or_above(trial, h) > balls_at_or_above(state, h)
    exact = level_step_probs(state, h, Fraction(1, 3), exact=True)
    assert exact.p_up == Fraction(1, 3) * Fraction(grew, n * n)
    shrinks = sum(1 for x in loads if x >= h)
    assert exact.p_down_lb == Fraction(2, 3) * Fraction(shrinks, n)


def test_c_good_constant():
    assert check_c_good(ConstantSchedule(0.6), (0, 1000), 2, 0.1, 10).good
    result = check_c_good(ConstantSchedule(0.5), (0, 1000), 2, 0.1, 10)
    assert not result.good
    assert result.mean == pytest.approx(0.5)
    assert result.sub_t2 - result.sub_t1 >= 20


def test_c_good_short_interval_is_good():
    assert check_c_good(ConstantSchedule(0.1), (0, 19), 2, 0.1, 10).good


def test_c_good_finds_middle_block():
    c, n = 1, 10
    schedule = explicit_from_blocks([(0.9, c * n), (0.1, c * n), (0.9, c * n)])
    result = check_c_good(schedule, (0, 3 * c * n), c, 0.2, n)
    assert not result.good
    assert result.mean < 0.6
    assert 0 <= result.sub_t1 < result.sub_t2 <= 3 * c * n


def _scan_is_good(eighths, window, target_eighths):
    """Every window of length >= `window` has mean >= target, checked length by length"""
    prefix = np.concatenate(([0], np.cumsum(eighths)))
    for length in range(window, len(eighths) + 1):
        if np.any(prefix[length:] - prefix[:-length] < target_eighths * length):
            return False
    return True


def _dipped_schedule(gen):
    """High beta with a few low dips, in eighths"""
    length = gen.randint(1, 2000)
    eighths = [gen.choice([6, 7])] * length
    for _ in range(gen.randint(0, 3)):
        start = gen.randrange(length)
        for t in range(start, min(length, start + gen.randint(1, 120))):
            eighths[t] = gen.choice([1, 2, 3])
    return eighths


def test_c_good_agrees_with_window_scan():
    # the offset keeps every window mean at least 1e-6 away from the target
    epsilon = 0.25 + 2e-6
    target = 4 * (1 + epsilon)
    gen = random.Random(2024)
    verdicts = []
    for _ in range(200):
        eighths = _dipped_schedule(gen)
        n, c = gen.randint(2, 40), gen.randint(1, 3)
        length = len(eighths)
        schedule = ExplicitSchedule(tuple(k / 8 for k in eighths))
        result = check_c_good(schedule, (0, length), c, epsilon, n)
        assert result.good == _scan_is_good(eighths, c * n, target)
        if not result.good:
            window = eighths[result.sub_t1:result.sub_t2]
            assert 0 <= result.sub_t1 < result.sub_t2 <= length
            assert len(window) >= c * n
            assert sum(window) < target * len(window)
        verdicts.append(result.good)
    assert any(verdicts) and not all(verdicts)
