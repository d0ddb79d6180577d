from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator, Literal

import numpy as np

SubjectGroup = Literal["Adult", "Elderly"]
ActivityKind = Literal["ADL", "Fall"]

_GROUP_PREFIX: dict[str, str] = {"Adult": "SA", "Elderly": "SE"}
_GROUP_BY_PREFIX: dict[str, SubjectGroup] = {"SA": "Adult", "SE": "Elderly"}
_GROUP_SIZE: dict[str, int] = {"Adult": 23, "Elderly": 15}
_GROUP_AGE_BAND: dict[str, tuple[int, int]] = {"Adult": (19, 30), "Elderly": (60, 75)}

_KIND_PREFIX: dict[str, str] = {"ADL": "D", "Fall": "F"}
_KIND_BY_PREFIX: dict[str, ActivityKind] = {"D": "ADL", "F": "Fall"}
_KIND_SIZE: dict[str, int] = {"ADL": 19, "Fall": 15}

_SUBJECT_RE = re.compile(r"^(SA|SE)(\d{2})$")
_ACTIVITY_RE = re.compile(r"^(D|F)(\d{2})$")


@dataclass(frozen=True, order=True)
class SubjectId:
    group: SubjectGroup
    index: int

    def __post_init__(self) -> None:
        if self.group not in _GROUP_SIZE:
            raise ValueError(f"Unknown subject group: {self.group!r}")
        if not 1 <= self.index <= _GROUP_SIZE[self.group]:
            raise ValueError(f"{self.group} subject index {self.index} outside 1..{_GROUP_SIZE[self.group]}")

    def __str__(self) -> str:
        return f"{_GROUP_PREFIX[self.group]}{self.index:02d}"

    @property
    def age_band(self) -> tuple[int, int]:
        return _GROUP_AGE_BAND[self.group]

    @classmethod
    def parse(cls, text: str) -> SubjectId:
        match = _SUBJECT_RE.match(text.strip().upper())
        if match is None:
            raise ValueError(f"Not a SisFall subject id: {text!r}")
        return cls(group=_GROUP_BY_PREFIX[match.group(1)], index=int(match.group(2)))

    @classmethod
    def all(cls) -> list[SubjectId]:
        """All 38 subjects, adults first, each group in index order."""
        return [cls(group, index) for group in ("Adult", "Elderly") for index in range(1, _GROUP_SIZE[group] + 1)]


@dataclass(frozen=True, order=True)
class ActivityCode:
    kind: ActivityKind
    index: int

    def __post_init__(self) -> None:
        if self.kind not in _KIND_SIZE:
            raise ValueError(f"Unknown activity kind: {self.kind!r}")
        if not 1 <= self.index <= _KIND_SIZE[self.kind]:
            raise ValueError(f"{self.kind} index {self.index} outside 1..{_KIND_SIZE[self.kind]}")

    def __str__(self) -> str:
        return f"{_KIND_PREFIX[self.kind]}{self.index:02d}"

    @property
    def is_fall(self) -> bool:
        return self.kind == "Fall"

    @classmethod
    def parse(cls, text: str) -> ActivityCode:
        match = _ACTIVITY_RE.match(text.strip().upper())
        if match is None:
            raise ValueError(f"Not a SisFall activity code: {text!r}")
        return cls(kind=_KIND_BY_PREFIX[match.group(1)], index=int(match.group(2)))

    @classmethod
    def all(cls) -> list[ActivityCode]:
        return [cls(kind, index) for kind in ("ADL", "Fall") for index in range(1, _KIND_SIZE[kind] + 1)]


@dataclass(frozen=True)
class SensorSpec:
    name: str
    bits: int
    range_magnitude: float
    unit: str

    def __post_init__(self) -> None:
        if self.bits <= 0 or self.range_magnitude <= 0:
            raise ValueError(f"Sensor {self.name} needs positive bits and range")

    @property
    def scale(self) -> float:
        """Physical units per ADC count: full two's-complement span over 2**bits."""
        return 2.0 * self.range_magnitude / float(2**self.bits)

    @property
    def count_limit(self) -> int:
        return 2 ** (self.bits - 1)


ADXL345 = SensorSpec(name="ADXL345", bits=13, range_magnitude=16.0, unit="g")
ITG3200 = SensorSpec(name="ITG3200", bits=16, range_magnitude=2000.0, unit="deg/s")
MMA8451Q = SensorSpec(name="MMA8451Q", bits=14, range_magnitude=8.0, unit="g")

SENSORS: tuple[SensorSpec, SensorSpec, SensorSpec] = (ADXL345, ITG3200, MMA8451Q)
# Column order of a data line: accel1 xyz, gyro xyz, accel2 xyz.
CHANNEL_SPECS: tuple[SensorSpec, ...] = tuple(spec for spec in SENSORS for _ in range(3))
CHANNEL_SCALES = np.array([spec.scale for spec in CHANNEL_SPECS], dtype=np.float64)
CHANNEL_LIMITS = np.array([spec.count_limit for spec in CHANNEL_SPECS], dtype=np.int64)
CHANNEL_NAMES: tuple[str, ...] = tuple(f"c{i}" for i in range(1, 10))


@dataclass(frozen=True)
class RawSample:
    counts: tuple[int, int, int, int, int, int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.counts) != 9:
            raise ValueError(f"RawSample needs 9 counts, got {len(self.counts)}")

    @property
    def accel1(self) -> tuple[int, int, int]:
        return self.counts[0:3]  # type: ignore[return-value]

    @property
    def gyro(self) -> tuple[int, int, int]:
        return self.counts[3:6]  # type: ignore[return-value]

    @property
    def accel2(self) -> tuple[int, int, int]:
        return self.counts[6:9]  # type: ignore[return-value]

    def within_range(self) -> bool:
        return all(abs(c) <= int(limit) for c, limit in zip(self.counts, CHANNEL_LIMITS))


@dataclass(frozen=True)
class CalibratedSample:
    accel1_g: tuple[float, float, float]
    gyro_dps: tuple[float, float, float]
    accel2_g: tuple[float, float, float]

    def as_tuple(self) -> tuple[float, ...]:
        return (*self.accel1_g, *self.gyro_dps, *self.accel2_g)


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """One parsed trial file.

    ``counts`` is an (n, 9) int64 array marked read-only; ``samples`` gives the
    per-row RawSample view.
    """

    subject: SubjectId
    activity: ActivityCode
    trial: int
    counts: np.ndarray
    source_path: str

    def __post_init__(self) -> None:
        if self.counts.ndim != 2 or self.counts.shape[1] != 9:
            raise ValueError(f"Trial counts must be (n, 9), got {self.counts.shape}")
        if self.counts.shape[0] == 0:
            raise ValueError(f"Trial {self.source_path} has no samples")
        self.counts.setflags(write=False)

    def __len__(self) -> int:
        return int(self.counts.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return (
            self.key == other.key
            and self.source_path == other.source_path
            and np.array_equal(self.counts, other.counts)
        )

    @property
    def key(self) -> tuple[SubjectId, ActivityCode, int]:
        return (self.subject, self.activity, self.trial)

    @property
    def samples(self) -> list[RawSample]:
        return [RawSample(tuple(int(v) for v in row)) for row in self.counts]  # type: ignore[arg-type]

    def iter_samples(self) -> Iterator[RawSample]:
        for row in self.counts:
            yield RawSample(tuple(int(v) for v in row))  # type: ignore[arg-type]


@dataclass(frozen=True)
class CatalogEntry:
    source_path: str
    subject: SubjectId
    activity: ActivityCode
    trial: int

    @property
    def key(self) -> tuple[SubjectId, ActivityCode, int]:
        return (self.subject, self.activity, self.trial)


@dataclass(frozen=True)
class SkippedFile:
    path: str
    reason: str


@dataclass(frozen=True)
class Catalog:
    root: str
    entries: tuple[CatalogEntry, ...]
    skipped: tuple[SkippedFile, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def subjects(self) -> list[SubjectId]:
        return sorted({entry.subject for entry in self.entries})

    def counts_by_subject(self) -> dict[str, int]:
        counts = Counter(str(entry.subject) for entry in self.entries)
        return dict(sorted(counts.items()))

    def counts_by_activity(self) -> dict[str, int]:
        counts = Counter(str(entry.activity) for entry in self.entries)
        return dict(sorted(counts.items()))

    def counts_by_subject_activity(self) -> dict[tuple[str, str], int]:
        counts = Counter((str(entry.subject), str(entry.activity)) for entry in self.entries)
        return dict(sorted(counts.items()))

    def for_subjects(self, subjects: set[SubjectId] | frozenset[SubjectId]) -> list[CatalogEntry]:
        return [entry for entry in self.entries if entry.subject in subjects]

    def to_dict(self) -> dict[str, Any]:
        return {
            "root": self.root,
            "file_count": len(self.entries),
            "by_subject": self.counts_by_subject(),
            "by_activity": self.counts_by_activity(),
            "skipped": [{"path": item.path, "reason": item.reason} for item in self.skipped],
        }
