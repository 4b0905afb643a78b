"""
Insertion probability schedules

A schedule maps a step t = 1, 2, ... to the probability beta(t) that step t
inserts a ball. Schedules are immutable and pure: querying the same t twice
yields the same value.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Any, ClassVar, Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, ScheduleTooShort
from core.randomness import derive_seed
from utils.helpers import load_json_document
from utils.log_manager import LOG_MESSAGES

logger = logging.getLogger('GreedySim')

NOISE_BLOCK = 1 << 16
BOUNDS_TOLERANCE = 1e-12


def _plain(value):
    """Tuples to lists, recursively, so the dict matches its JSON form"""
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


class Schedule(ABC):
    """Base class of all schedule kinds"""

    kind: ClassVar[str] = ""
    declared: Optional[Tuple[float, float]] = None

    @property
    @abstractmethod
    def natural_bounds(self) -> Tuple[float, float]:
        """Tightest interval known to contain every emitted value"""

    @property
    def length(self) -> Optional[int]:
        """Number of steps covered, None if unbounded"""
        return None

    @abstractmethod
    def beta(self, t: int) -> float:
        """Insertion probability of step t (t >= 1)"""

    @property
    def bounds(self) -> Tuple[float, float]:
        return tuple(self.declared) if self.declared is not None else self.natural_bounds

    def values(self, start: int, stop: int) -> np.ndarray:
        """beta(t) for t = start..stop inclusive"""
        self._check_range(start, stop)
        return np.array([self.beta(t) for t in range(start, stop + 1)], dtype=float)

    def for_replica(self, replica_seed: int) -> "Schedule":
        """Schedule seen by the replica running with `replica_seed`"""
        return self

    def _check_range(self, start: int, stop: int) -> None:
        if start < 1:
            raise ValueError(f"schedule steps start at 1, got {start}")
        if self.length is not None and stop > self.length:
            raise ScheduleTooShort(f"{self.kind} schedule covers {self.length} steps, asked for {stop}")

    def _validate_bounds(self) -> None:
        lo, hi = self.natural_bounds
        if lo < -BOUNDS_TOLERANCE or hi > 1 + BOUNDS_TOLERANCE:
            raise ConfigError(f"{self.kind} schedule leaves [0, 1]: [{lo}, {hi}]")
        if self.declared is not None:
            d_lo, d_hi = self.declared
            if not 0 <= d_lo <= d_hi <= 1:
                raise ConfigError(f"declared bounds must satisfy 0 <= lo <= hi <= 1, got {self.declared}")
            if lo < d_lo - BOUNDS_TOLERANCE or hi > d_hi + BOUNDS_TOLERANCE:
                raise ConfigError(
                    f"{self.kind} schedule emits values in [{lo}, {hi}] outside declared {self.declared}")

    def to_dict(self) -> Dict[str, Any]:
        data = _plain(asdict(self))
        data["kind"] = self.kind
        return data


@dataclass(frozen=True)
class ConstantSchedule(Schedule):
    value: float
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "constant"

    def __post_init__(self):
        self._validate_bounds()

    @property
    def natural_bounds(self):
        return (self.value, self.value)

    def beta(self, t: int) -> float:
        return self.value

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        return np.full(stop - start + 1, self.value, dtype=float)


@dataclass(frozen=True)
class PiecewiseSchedule(Schedule):
    """Consecutive (duration, beta) segments; the last segment never ends"""
    segments: Tuple[Tuple[int, float], ...]
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "piecewise"

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple((int(d), float(b)) for d, b in self.segments))
        if not self.segments:
            raise ConfigError("piecewise schedule needs at least one segment")
        if any(d < 1 for d, _ in self.segments):
            raise ConfigError("segment durations must be positive")
        self._validate_bounds()

    @property
    def natural_bounds(self):
        betas = [b for _, b in self.segments]
        return (min(betas), max(betas))

    def beta(self, t: int) -> float:
        end = 0
        for duration, value in self.segments:
            end += duration
            if t <= end:
                return value
        return self.segments[-1][1]

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        ends = np.cumsum([d for d, _ in self.segments])
        betas = np.array([b for _, b in self.segments] + [self.segments[-1][1]])
        steps = np.arange(start, stop + 1)
        return betas[np.searchsorted(ends, steps, side="left")]


@dataclass(frozen=True)
class SinusoidSchedule(Schedule):
    """beta(t) = mid + amplitude * sin(2 pi t / period)"""
    mid: float
    amplitude: float
    period: float
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "sinusoid"

    def __post_init__(self):
        if self.period <= 0:
            raise ConfigError("sinusoid period must be positive")
        self._validate_bounds()

    @property
    def natural_bounds(self):
        a = abs(self.amplitude)
        return (self.mid - a, self.mid + a)

    def beta(self, t: int) -> float:
        value = self.mid + self.amplitude * math.sin(2 * math.pi * t / self.period)
        return min(1.0, max(0.0, value))

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        steps = np.arange(start, stop + 1, dtype=float)
        return np.clip(self.mid + self.amplitude * np.sin(2 * np.pi * steps / self.period), 0.0, 1.0)


@dataclass(frozen=True)
class ExplicitSchedule(Schedule):
    """beta(t) = values[t - 1]; querying past the array is an error"""
    betas: Tuple[float, ...]
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "explicit"

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.betas:
            raise ConfigError("explicit schedule needs at least one value")
        self._validate_bounds()

    @property
    def natural_bounds(self):
        return (min(self.betas), max(self.betas))

    @property
    def length(self):
        return len(self.betas)

    def beta(self, t: int) -> float:
        if t < 1 or t > len(self.betas):
            raise ScheduleTooShort(f"explicit schedule has {len(self.betas)} values, asked for t={t}")
        return self.betas[t - 1]

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        return np.asarray(self.betas[start - 1:stop], dtype=float)


@dataclass(frozen=True)
class DeletionBurstSchedule(Schedule):
    """beta_pre up to t_switch, then 1/2 - epsilon for ceil(n ln n / (2 + 4 epsilon)) steps"""
    beta_pre: float
    t_switch: int
    epsilon: float
    n: int
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "deletion_burst"

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ConfigError(f"burst epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.t_switch < 0 or self.n < 2:
            raise ConfigError("burst needs t_switch >= 0 and n >= 2")
        self._validate_bounds()

    @property
    def burst_beta(self) -> float:
        return 0.5 - self.epsilon

    @property
    def burst_length(self) -> int:
        return math.ceil(self.n * math.log(self.n) / (2 + 4 * self.epsilon))

    @property
    def natural_bounds(self):
        if self.t_switch == 0:
            return (self.burst_beta, self.burst_beta)
        return (min(self.beta_pre, self.burst_beta), max(self.beta_pre, self.burst_beta))

    @property
    def length(self):
        return self.t_switch + self.burst_length

    def beta(self, t: int) -> float:
        self._check_range(t, t)
        return self.beta_pre if t <= self.t_switch else self.burst_beta

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        steps = np.arange(start, stop + 1)
        return np.where(steps <= self.t_switch, self.beta_pre, self.burst_beta).astype(float)


@lru_cache(maxsize=16)
def _noise_block(seed: int, low: float, high: float, block: int) -> np.ndarray:
    generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    return generator.uniform(low, high, NOISE_BLOCK)


@dataclass(frozen=True)
class UniformNoiseSchedule(Schedule):
    """i.i.d. beta(t) ~ Uniform[low, high], a pure function of (seed, t)

    With `per_replica` set, replica s draws its own sequence from
    derive_seed(seed, s) instead of sharing this one.
    """
    low: float
    high: float
    seed: int = 0
    declared: Optional[Tuple[float, float]] = None
    per_replica: bool = False
    kind: ClassVar[str] = "uniform_noise"

    def __post_init__(self):
        if self.low > self.high:
            raise ConfigError("uniform noise needs low <= high")
        self._validate_bounds()

    @property
    def natural_bounds(self):
        return (self.low, self.high)

    def for_replica(self, replica_seed: int) -> "UniformNoiseSchedule":
        if not self.per_replica:
            return self
        return replace(self, seed=derive_seed(self.seed, replica_seed))

    def beta(self, t: int) -> float:
        block, offset = divmod(t - 1, NOISE_BLOCK)
        return float(_noise_block(self.seed, self.low, self.high, block)[offset])

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        first, last = (start - 1) // NOISE_BLOCK, (stop - 1) // NOISE_BLOCK
        blocks = [_noise_block(self.seed, self.low, self.high, b) for b in range(first, last + 1)]
        joined = np.concatenate(blocks)
        offset = (start - 1) - first * NOISE_BLOCK
        return joined[offset:offset + (stop - start + 1)].copy()


@dataclass(frozen=True)
class AlternatingSchedule(Schedule):
    """Insert for `prefill` steps, then alternate a deletion and an insertion"""
    prefill: int
    declared: Optional[Tuple[float, float]] = None
    kind: ClassVar[str] = "alternating"

    def __post_init__(self):
        if self.prefill < 0:
            raise ConfigError("prefill must be non-negative")
        self._validate_bounds()

    @property
    def natural_bounds(self):
        return (0.0, 1.0)

    def beta(self, t: int) -> float:
        if t <= self.prefill:
            return 1.0
        return 0.0 if (t - self.prefill) % 2 == 1 else 1.0

    def values(self, start: int, stop: int) -> np.ndarray:
        self._check_range(start, stop)
        steps = np.arange(start, stop + 1)
        deleting = (steps > self.prefill) & ((steps - self.prefill) % 2 == 1)
        return np.where(deleting, 0.0, 1.0)


SCHEDULE_KINDS = {
    cls.kind: cls for cls in (
        ConstantSchedule, PiecewiseSchedule, SinusoidSchedule, ExplicitSchedule,
        DeletionBurstSchedule, UniformNoiseSchedule, AlternatingSchedule,
    )
}


def schedule_from_dict(data: Dict[str, Any]) -> Schedule:
    """Build a schedule from its JSON form ({"kind": ..., fields...})"""
    values = dict(data)
    kind = values.pop("kind", None)
    if kind not in SCHEDULE_KINDS:
        raise ConfigError(f"unknown schedule kind {kind!r}; expected one of {sorted(SCHEDULE_KINDS)}")
    if values.get("declared") is not None:
        values["declared"] = tuple(values["declared"])
    try:
        return SCHEDULE_KINDS[kind](**values)
    except TypeError as e:
        raise ConfigError(f"bad fields for {kind} schedule: {e}") from e


def make_deletion_burst_schedule(n: int, beta_pre: float, t_switch: int, epsilon: float) -> DeletionBurstSchedule:
    return DeletionBurstSchedule(beta_pre=beta_pre, t_switch=t_switch, epsilon=epsilon, n=n)


def explicit_from_blocks(blocks: Sequence[Tuple[float, int]]) -> ExplicitSchedule:
    """Explicit schedule from (beta, repeat) blocks"""
    values = []
    for beta, repeat in blocks:
        values.extend([beta] * repeat)
    return ExplicitSchedule(tuple(values))


def load_schedule(path) -> Schedule:
    """Read a schedule JSON document"""
    schedule = schedule_from_dict(load_json_document(path))
    logger.info(LOG_MESSAGES["schedule_loaded"].format(path))
    return schedule
