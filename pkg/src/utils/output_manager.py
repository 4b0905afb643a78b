"""
Writers and readers for run outputs

samples.jsonl holds one MetricsSample per line with keys in SAMPLE_FIELDS
order, report.json holds the RunReport, samples.csv is an optional export.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List

from core.models import SAMPLE_FIELDS, MetricsSample, RunReport
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')

SAMPLES_FILE = "samples.jsonl"
REPORT_FILE = "report.json"
CSV_FILE = "samples.csv"


def sample_line(sample: MetricsSample) -> str:
    return json.dumps(sample.to_row(), ensure_ascii=False)


def write_samples_jsonl(path, samples: Iterable[MetricsSample]) -> int:
    path = Path(path)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sample in samples:
            f.write(sample_line(sample) + "\n")
            count += 1
    logger.info(LOG_MESSAGES["samples_written"].format(count, path))
    return count


def read_samples_jsonl(path) -> List[MetricsSample]:
    with open(path, "r", encoding="utf-8") as f:
        return [MetricsSample.from_row(json.loads(line)) for line in f if line.strip()]


def write_samples_csv(path, samples: Iterable[MetricsSample]) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SAMPLE_FIELDS)
        writer.writeheader()
        for sample in samples:
            row = sample.to_row()
            if row["level_statuses"] is not None:
                row["level_statuses"] = "|".join(row["level_statuses"])
            writer.writerow(row)
    logger.info(LOG_MESSAGES["csv_written"].format(path))


def write_report(path, report: RunReport) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, ensure_ascii=False)
    logger.info(LOG_MESSAGES["report_written"].format(path))


def read_report(path) -> RunReport:
    with open(path, "r", encoding="utf-8") as f:
        return RunReport.from_dict(json.load(f))


def write_run_outputs(out_dir, report: RunReport, samples: List[MetricsSample], write_csv: bool = False) -> Path:
    """Write samples, report and the optional CSV into `out_dir`"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if samples:
        write_samples_jsonl(out_dir / SAMPLES_FILE, samples)
        if write_csv:
            write_samples_csv(out_dir / CSV_FILE, samples)
    write_report(out_dir / REPORT_FILE, report)
    return out_dir
