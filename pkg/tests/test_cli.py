import json

import pytest
from mock import Mock, patch

from cli.commands import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run_cli
from core.models import CheckResult, RunReport


def test_thresholds_table(capsys):
    assert run_cli(["thresholds", "--n", str(2 ** 20), "--beta-hat", "0.5"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "l* = 2" in out
    assert "24.0000" in out


def test_thresholds_too_small(capsys):
    assert run_cli(["thresholds", "--n", "1024", "--beta-hat", "0.5"]) == EXIT_USAGE


def test_simulate_writes_outputs(tmp_path, capsys):
    code = run_cli(["simulate", "--n", "8", "--steps", "300", "--seed", "1", "--beta", "0.6",
                    "--sample-every", "50", "--out", str(tmp_path), "--csv"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert [s["seed"] for s in report["seeds"]] == [1]
    assert (tmp_path / "samples.jsonl").exists()
    assert (tmp_path / "samples.csv").exists()


def test_simulate_from_config_file(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"name": "cfg", "n": 6, "steps": 120, "seeds_count": 2,
                                  "schedule": {"kind": "constant", "value": 0.7}}), encoding="utf-8")
    out = tmp_path / "out"
    assert run_cli(["simulate", "--config", str(config), "--steps", "60", "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["config"]["steps"] == 60
    assert report["config"]["schedule"]["value"] == 0.7
    assert len(report["seeds"]) == 2


def test_simulate_rejects_bad_config(tmp_path):
    assert run_cli(["simulate", "--n", "1", "--out", str(tmp_path)]) == EXIT_USAGE


def test_seed_and_seeds_are_exclusive():
    with pytest.raises(SystemExit) as info:
        run_cli(["simulate", "--seed", "1", "--seeds", "3"])
    assert info.value.code == 2


def test_check_cgood_exit_codes(tmp_path, capsys):
    path = tmp_path / "schedule.json"
    path.write_text(json.dumps({"kind": "explicit", "betas": [0.9] * 10 + [0.1] * 10 + [0.9] * 10}),
                    encoding="utf-8")
    assert run_cli(["check-cgood", "--schedule", str(path), "--c", "1", "--epsilon", "0.2", "--n", "10"]) \
        == EXIT_FAILED
    assert "Violation" in capsys.readouterr().out
    assert run_cli(["check-cgood", "--schedule", str(path), "--c", "1", "--epsilon", "0.2", "--n", "10",
                    "--t2", "10"]) == EXIT_OK


def test_walk_commands(capsys):
    assert run_cli(["walk", "hit", "--D", "3", "--trials", "5000"]) == EXIT_OK
    assert "12.0000" in capsys.readouterr().out
    assert run_cli(["walk", "cross", "--r", "2", "--a", "1", "--b", "1", "--trials", "20000"]) == EXIT_OK
    assert "0.333333" in capsys.readouterr().out


def test_couple_majorization(tmp_path):
    out = tmp_path / "couple.json"
    assert run_cli(["couple", "--n", "8", "--steps", "500", "--seed", "3", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["passed"] is True


def test_suite_unknown_name():
    assert run_cli(["suite", "no-such-suite"]) == EXIT_USAGE


def test_suite_failure_sets_exit_code(tmp_path):
    failing = RunReport(name="suite-x", config={}, checks=[CheckResult("x", False, 1, 0)], passed=False)
    with patch("cli.commands.theorem_suite", return_value=failing) as runner:
        assert run_cli(["suite", "thresholds", "--quick", "--out", str(tmp_path)]) == EXIT_FAILED
    runner.assert_called_once_with("thresholds", jobs=1, out=tmp_path / "report.json", quick=True, seed=0)


def test_suite_writes_report(tmp_path):
    assert run_cli(["suite", "thresholds", "--out", str(tmp_path / "thresholds.json")]) == EXIT_OK
    assert json.loads((tmp_path / "thresholds.json").read_text(encoding="utf-8"))["passed"] is True


def test_internal_key_error_is_not_a_usage_error():
    with patch.dict("cli.commands.COMMANDS", {"thresholds": Mock(side_effect=KeyError("internal"))}):
        with pytest.raises(KeyError):
            run_cli(["thresholds", "--n", str(2 ** 20), "--beta-hat", "0.5"])
