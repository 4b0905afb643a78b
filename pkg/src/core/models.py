"""
Data models and settings for the simulator
"""

from dataclasses import dataclass, field, asdict, fields
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from core.errors import ConfigError
from core.schedules import Schedule, ConstantSchedule, schedule_from_dict


ENGINE_VERSION = "1.0.0"


class DeletionModel(str, Enum):
    """Which ball a deletion step removes"""
    BIN = "bin"     # uniform non-empty bin
    BALL = "ball"   # uniform ball


class EventKind(str, Enum):
    INSERT = "insert"
    DELETE_BIN = "delete_bin"
    DELETE_BALL = "delete_ball"
    NOOP = "noop"


class LevelStatus(str, Enum):
    SAFE = "safe"
    CRITICAL = "critical"
    INVALID = "invalid"


@dataclass(frozen=True)
class StepEvent:
    """One step of the process, as recorded in the event log"""
    kind: EventKind
    bin: Optional[int] = None
    choices: Tuple[int, ...] = ()
    reason: Optional[str] = None

    @classmethod
    def insert(cls, bin_id: int, choices: Tuple[int, ...]) -> "StepEvent":
        return cls(EventKind.INSERT, bin_id, choices)

    @classmethod
    def delete(cls, model: "DeletionModel", bin_id: int) -> "StepEvent":
        kind = EventKind.DELETE_BIN if model is DeletionModel.BIN else EventKind.DELETE_BALL
        return cls(kind, bin_id)

    @classmethod
    def noop(cls, reason: str = "empty system") -> "StepEvent":
        return cls(EventKind.NOOP, reason=reason)

    @property
    def choice_a(self) -> Optional[int]:
        return self.choices[0] if self.choices else None

    @property
    def choice_b(self) -> Optional[int]:
        return self.choices[1] if len(self.choices) > 1 else None

    @property
    def load_delta(self) -> int:
        if self.kind is EventKind.INSERT:
            return 1
        if self.kind is EventKind.NOOP:
            return 0
        return -1


# Column order of sample rows (JSONL keys and CSV header)
SAMPLE_FIELDS = (
    "seed", "t", "m", "m_max", "x_max", "x_min", "disc", "adisc", "overload",
    "gamma_potential", "balls_above_gamma", "level_statuses",
)


@dataclass
class MetricsSample:
    """Snapshot of the balance statistics at time t"""
    t: int
    m: int
    m_max: int
    x_max: int
    x_min: int
    disc: float
    adisc: float
    overload: float
    gamma_potential: Optional[float] = None
    balls_above_gamma: Optional[int] = None
    level_statuses: Optional[List[LevelStatus]] = None
    seed: Optional[int] = None

    def to_row(self) -> Dict[str, Any]:
        statuses = None
        if self.level_statuses is not None:
            statuses = [LevelStatus(s).value for s in self.level_statuses]
        values = asdict(self)
        values["level_statuses"] = statuses
        return {key: values[key] for key in SAMPLE_FIELDS}

    @classmethod
    def from_row(cls, row: Dict[str, Any]) -> "MetricsSample":
        data = dict(row)
        if data.get("level_statuses") is not None:
            data["level_statuses"] = [LevelStatus(s) for s in data["level_statuses"]]
        return cls(**data)


@dataclass
class ExperimentConfig:
    """Settings of one simulation experiment"""
    name: str = "simulation"
    n: int = 64
    steps: int = 10_000
    seed: int = 0
    seeds_count: int = 1
    schedule: Schedule = field(default_factory=lambda: ConstantSchedule(0.6))
    deletion_model: DeletionModel = DeletionModel.BIN
    d: int = 2
    alpha: Optional[float] = None
    gamma: int = 1
    sample_every: int = 100
    thresholds_enabled: bool = False
    beta_hat: Optional[float] = None
    initial_load: int = 0
    record_events: bool = False
    output_path: Optional[str] = None
    write_csv: bool = False
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.steps < 1:
            raise ConfigError(f"steps must be at least 1, got {self.steps}")
        if self.sample_every < 1:
            raise ConfigError(f"sample_every must be at least 1, got {self.sample_every}")
        if self.seeds_count < 1:
            raise ConfigError(f"seeds_count must be at least 1, got {self.seeds_count}")
        if self.d < 1:
            raise ConfigError(f"d must be at least 1, got {self.d}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")
        if self.initial_load < 0:
            raise ConfigError(f"initial_load must be non-negative, got {self.initial_load}")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.schedule.length is not None and self.schedule.length < self.steps:
            raise ConfigError(
                f"schedule covers {self.schedule.length} steps, run needs {self.steps}")
        if self.thresholds_enabled:
            beta_hat = self.effective_beta_hat
            if not 0 < beta_hat < 1:
                raise ConfigError(f"thresholds need 0 < beta_hat < 1, got {beta_hat}")
        return self

    @property
    def effective_beta_hat(self) -> float:
        if self.beta_hat is not None:
            return self.beta_hat
        return self.schedule.bounds[1]

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["schedule"] = self.schedule.to_dict()
        data["deletion_model"] = self.deletion_model.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        values = dict(data)
        if "schedule" in values and not isinstance(values["schedule"], Schedule):
            values["schedule"] = schedule_from_dict(values["schedule"])
        if "deletion_model" in values:
            try:
                values["deletion_model"] = DeletionModel(values["deletion_model"])
            except ValueError as e:
                raise ConfigError(str(e)) from e
        return cls(**values)


@dataclass
class SeedSummary:
    """Per-seed row of a run report"""
    seed: int
    steps: int
    final_m: int
    max_disc: float
    max_adisc: float
    max_overload: float
    final_gamma: Optional[float] = None
    level_invalid_counts: Optional[List[int]] = None
    inserts: int = 0
    deletions: int = 0
    noops: int = 0
    samples: int = 0


@dataclass
class CheckResult:
    """One pass/fail comparison of a suite"""
    name: str
    passed: bool
    value: Any
    threshold: Any
    note: str = ""


@dataclass
class RunReport:
    """Summary of a simulation run or acceptance suite"""
    name: str
    config: Dict[str, Any]
    seeds: List[SeedSummary] = field(default_factory=list)
    aggregates: Dict[str, Dict[str, float]] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    passed: Optional[bool] = None
    wall_clock_s: float = 0.0
    engine_version: str = ENGINE_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        values = dict(data)
        values["seeds"] = [SeedSummary(**row) for row in data.get("seeds", [])]
        values["checks"] = [CheckResult(**row) for row in data.get("checks", [])]
        return cls(**values)
