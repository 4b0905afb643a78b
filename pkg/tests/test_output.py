import csv

from core.experiments import run_simulation
from core.models import CheckResult, ExperimentConfig, LevelStatus, MetricsSample, RunReport
from core.schedules import PiecewiseSchedule
from utils.output_manager import (
    CSV_FILE, REPORT_FILE, SAMPLES_FILE, read_report, read_samples_jsonl, sample_line,
    write_run_outputs, write_samples_csv, write_samples_jsonl,
)


def _sample(**overrides):
    values = dict(t=10, m=5, m_max=7, x_max=3, x_min=0, disc=1.75, adisc=1.75, overload=1.25, seed=4)
    values.update(overrides)
    return MetricsSample(**values)


def test_sample_line_key_order():
    line = sample_line(_sample())
    assert line.startswith('{"seed": 4, "t": 10, "m": 5')
    assert line.endswith('"level_statuses": null}')


def test_jsonl_read_back(tmp_path):
    samples = [_sample(), _sample(t=20, level_statuses=[LevelStatus.SAFE, LevelStatus.CRITICAL])]
    path = tmp_path / SAMPLES_FILE
    assert write_samples_jsonl(path, samples) == 2
    assert read_samples_jsonl(path) == samples


def test_csv_joins_level_statuses(tmp_path):
    path = tmp_path / CSV_FILE
    write_samples_csv(path, [_sample(level_statuses=[LevelStatus.SAFE, LevelStatus.INVALID])])
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["level_statuses"] == "safe|invalid"
    assert rows[0]["disc"] == "1.75"


def test_report_read_back(tmp_path):
    report = RunReport(name="r", config={"n": 4}, checks=[CheckResult("c", True, [1, 2], 3, "note")], passed=True)
    write_run_outputs(tmp_path, report, [])
    assert read_report(tmp_path / REPORT_FILE) == report
    assert not (tmp_path / SAMPLES_FILE).exists()


def test_simulation_outputs(tmp_path):
    config = ExperimentConfig(name="out", n=8, steps=300, seeds_count=2, sample_every=50,
                              schedule=PiecewiseSchedule(((100, 0.9), (100, 0.3))), write_csv=True)
    result = run_simulation(config, out_dir=tmp_path)
    assert read_samples_jsonl(tmp_path / SAMPLES_FILE) == result.samples
    assert read_report(tmp_path / REPORT_FILE) == result.report
    assert (tmp_path / CSV_FILE).exists()
