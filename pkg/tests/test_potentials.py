import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.bin_state import BinState
from core.errors import ConfigError, PotentialOverflow
from core.models import DeletionModel
from core.potentials import (
    PotentialParams, ball_potential_sum, drift_estimate, excess_loads, expected_drift,
    gamma_potential, phi, phi_clipped, psi,
)
from core.randomness import RandomStream

load_vectors = st.lists(st.integers(min_value=0, max_value=30), min_size=1, max_size=64)


def test_balanced_state():
    state = BinState.balanced(8, 24)
    assert phi(state, 0.7) == pytest.approx(8)
    assert psi(state, 0.7) == pytest.approx(8)
    assert gamma_potential(state, 0.7) == pytest.approx(16)


def test_hand_example():
    state = BinState([3, 2, 2, 1])
    a = 0.4
    assert phi(state, a) == pytest.approx(math.exp(a) + 2 + math.exp(-a))
    assert psi(state, a) == pytest.approx(math.exp(-a) + 2 + math.exp(a))
    assert gamma_potential(state, a) == pytest.approx(2 * (math.exp(a) + math.exp(-a)) + 4)


@settings(max_examples=60, deadline=None)
@given(load_vectors, st.floats(min_value=0.01, max_value=1.0))
def test_phi_matches_direct_sum(loads, alpha):
    state = BinState(loads)
    avg = sum(loads) / len(loads)
    direct = sum(math.exp(alpha * (x - avg)) for x in loads)
    assert phi(state, alpha) == pytest.approx(direct, rel=1e-12)
    assert gamma_potential(state, alpha) >= 2 * len(loads) * (1 - 1e-12)


def test_overflow_is_reported():
    with pytest.raises(PotentialOverflow):
        phi(BinState([5000, 0]), 1.0)


def test_excess_loads():
    excess, counts = excess_loads(BinState([5, 2, 1, 0]))
    assert float(counts[excess == 3].sum()) == 1
    assert float(counts[excess == 0].sum()) == 3


def test_ball_potential_without_excess():
    state = BinState.balanced(6, 15)
    assert ball_potential_sum(state, 0.3) == 0
    assert phi_clipped(state, 0.3) == pytest.approx(6)


def test_ball_potential_single_tall_bin():
    # ceil(m/n) = 2, bin 0 holds 5 balls above it
    state = BinState([7, 0, 0, 0, 0])
    assert ball_potential_sum(state, 0.2) == pytest.approx(math.exp(0.2 * 5))


@settings(max_examples=60, deadline=None)
@given(load_vectors, st.floats(min_value=0.01, max_value=0.5))
def test_ball_potential_identity(loads, alpha):
    state = BinState(loads)
    excess, counts = excess_loads(state)
    zero_bins = float(counts[excess == 0].sum())
    assert ball_potential_sum(state, alpha) + zero_bins == pytest.approx(phi_clipped(state, alpha), rel=1e-9)


def test_potential_params_bounds():
    assert PotentialParams(0.03, 3 / 16, 0.5).fits_discrepancy_bound
    assert PotentialParams(0.03, 3 / 16, 0.5).fits_drift_bound
    with pytest.raises(ConfigError):
        PotentialParams(0.1, 3 / 16, 0.5).require_drift_bound()
    with pytest.raises(ConfigError):
        PotentialParams(0.05, 3 / 16, 0.5).require_discrepancy_bound()
    with pytest.raises(ConfigError):
        PotentialParams(-1.0)


def test_drift_needs_enough_trials(rng):
    with pytest.raises(ValueError):
        drift_estimate(BinState.empty(4), 0.6, 0.1, 10, rng)


def test_drift_leaves_state_untouched(rng):
    state = BinState([4, 2, 0, 1])
    drift_estimate(state, 0.6, 0.1, 1000, rng)
    assert state == BinState([4, 2, 0, 1])


@pytest.mark.parametrize("model", [DeletionModel.BIN, DeletionModel.BALL])
def test_drift_estimate_matches_enumeration(model):
    state = BinState.balanced(8, 16)
    exact = expected_drift(state, 0.6, 0.3, model)
    estimate = drift_estimate(state, 0.6, 0.3, 20_000, RandomStream(31), model)
    assert abs(estimate.mean - exact) <= 5 * estimate.std_err + 1e-12


def test_expected_drift_on_small_state_by_hand():
    state = BinState([1, 0])
    a = 0.5
    base = gamma_potential(state, a)
    # any insertion lands in bin 1 unless both choices hit bin 0
    insert = (0.75 * (gamma_potential(BinState([1, 1]), a) - base)
              + 0.25 * (gamma_potential(BinState([2, 0]), a) - base))
    delete = gamma_potential(BinState([0, 0]), a) - base
    assert expected_drift(state, 0.4, a) == pytest.approx(0.4 * insert + 0.6 * delete)


def test_pure_insertion_drift_is_negative_on_skewed_state():
    state = BinState([12, 0, 0, 0, 0, 0])
    assert expected_drift(state, 1.0, 0.5) < 0


def test_drift_is_negative_far_from_balance():
    loads = np.zeros(16, dtype=int)
    loads[0] = 40
    state = BinState(loads.tolist())
    assert expected_drift(state, 0.6, 0.1) < 0
