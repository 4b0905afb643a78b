import json

import numpy as np
import pytest

from core.errors import ConfigError, UnknownSuite
from core.potentials import PotentialParams
from core.suites import MIN_DISTANCE_WINDOWS, _distance_check, describe, suite_names, theorem_suite


def _by_name(report):
    return {c.name: c for c in report.checks}


@pytest.mark.parametrize("name", [
    "potential-identity", "majorization", "level-transitions", "thresholds", "determinism",
])
def test_exact_suites_pass_in_quick_mode(name):
    report = theorem_suite(name, quick=True)
    assert report.checks
    assert report.passed, [c for c in report.checks if not c.passed]


@pytest.mark.parametrize("name", [
    "walk-hitting", "rank-law", "drift", "walk-crossing", "discrepancy-log", "balls-above-average",
    "overload", "lower-bound", "coupling-time",
])
def test_statistical_suites_report_checks(name):
    report = theorem_suite(name, quick=True, seed=1)
    assert report.checks
    assert report.passed == all(c.passed for c in report.checks)
    assert report.config == {"suite": name, "quick": True, "jobs": 1, "seed": 1}


def test_drift_suite_uses_alpha_inside_the_drift_bound():
    checks = _by_name(theorem_suite("drift", quick=True))
    engineered = checks["engineered state drift is negative"]
    assert "alpha=0.0375" in engineered.note
    assert engineered.passed, engineered
    with pytest.raises(ConfigError):
        PotentialParams(0.1, beta_lb=0.6).require_drift_bound()


def test_rank_law_replays_targets_on_the_state():
    check = _by_name(theorem_suite("rank-law", quick=True))["vectorized targets match place_greedy"]
    assert check.passed
    assert check.value == 0


def test_coupling_distance_check_sees_moving_runs():
    check = _by_name(theorem_suite("coupling-time", quick=True))["distance does not grow in expectation"]
    assert check.passed, check.note


def test_distance_check_fails_when_every_run_has_met():
    traces = np.zeros((200, 2001), dtype=np.int64)
    traces[:, 0] = 1
    check = _distance_check(traces, 3.0)
    assert not check.passed
    assert check.note.startswith("1 windows")
    assert MIN_DISTANCE_WINDOWS > 1


def test_distance_check_fails_on_growing_distance():
    traces = np.tile(np.arange(1, 66), (40, 1))
    assert not _distance_check(traces, 3.0).passed


def test_distance_check_passes_on_shrinking_distance():
    gen = np.random.default_rng(0)
    traces = np.empty((200, 513), dtype=np.int64)
    traces[:, 0] = 6
    for t in range(1, 513):
        moves = np.where(gen.random(200) < 0.6, -1, 1)
        traces[:, t] = np.where(traces[:, t - 1] > 0, traces[:, t - 1] + moves, 0)
    assert _distance_check(traces, 3.0).passed


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        theorem_suite("no-such-suite")


def test_suite_catalogue():
    names = suite_names()
    assert names == sorted(names)
    assert {"majorization", "walk-hitting", "discrepancy-log", "lower-bound"} <= set(names)
    assert describe("walk-hitting")
    assert describe("nothing") is None


def test_suite_report_written(tmp_path):
    out = tmp_path / "report.json"
    report = theorem_suite("thresholds", quick=True, out=out)
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["passed"] is report.passed
    assert len(data["checks"]) == len(report.checks)


@pytest.mark.slow
def test_all_suites_full_size():
    assert theorem_suite("all", jobs=4).passed
