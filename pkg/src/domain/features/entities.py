from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

FeatureMode = Literal["raw9", "svm3"]

FEATURE_WIDTH: dict[str, int] = {"raw9": 9, "svm3": 3}
FEATURE_COLUMNS: dict[str, tuple[str, ...]] = {
    "raw9": (
        "accel1_x",
        "accel1_y",
        "accel1_z",
        "gyro_x",
        "gyro_y",
        "gyro_z",
        "accel2_x",
        "accel2_y",
        "accel2_z",
    ),
    "svm3": ("accel1_svm", "gyro_svm", "accel2_svm"),
}


def parse_feature_mode(value: str) -> FeatureMode:
    mode = value.strip().lower()
    if mode not in FEATURE_WIDTH:
        raise ValueError(f"Unknown feature mode {value!r}; expected raw9 or svm3")
    return mode  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature rows with binary labels and per-row provenance.

    Provenance is columnar: ``subjects[i]``, ``activities[i]``, ``trials[i]``
    and ``sample_rows[i]`` describe row ``i``; ``groups[i]`` numbers the
    source trial (0-based, in input order) for trial-level splitting.
    """

    rows: np.ndarray
    labels: np.ndarray
    subjects: np.ndarray
    activities: np.ndarray
    trials: np.ndarray
    sample_rows: np.ndarray
    groups: np.ndarray

    def __post_init__(self) -> None:
        n = self.rows.shape[0]
        if self.rows.ndim != 2:
            raise ValueError(f"rows must be 2-D, got shape {self.rows.shape}")
        for name in ("labels", "subjects", "activities", "trials", "sample_rows", "groups"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"{name} has {getattr(self, name).shape[0]} entries for {n} rows")
        if n and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def width(self) -> int:
        return int(self.rows.shape[1])

    def provenance(self, index: int) -> tuple[str, str, int, int]:
        return (
            str(self.subjects[index]),
            str(self.activities[index]),
            int(self.trials[index]),
            int(self.sample_rows[index]),
        )

    def subset(self, indices: np.ndarray) -> LabeledDataset:
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            rows=self.rows[idx],
            labels=self.labels[idx],
            subjects=self.subjects[idx],
            activities=self.activities[idx],
            trials=self.trials[idx],
            sample_rows=self.sample_rows[idx],
            groups=self.groups[idx],
        )

    def with_rows(self, rows: np.ndarray) -> LabeledDataset:
        return LabeledDataset(
            rows=rows,
            labels=self.labels,
            subjects=self.subjects,
            activities=self.activities,
            trials=self.trials,
            sample_rows=self.sample_rows,
            groups=self.groups,
        )

    def class_counts(self) -> dict[int, int]:
        return {0: int(np.sum(self.labels == 0)), 1: int(np.sum(self.labels == 1))}

    @classmethod
    def from_arrays(cls, rows: np.ndarray, labels: np.ndarray) -> LabeledDataset:
        """Dataset without SisFall provenance, e.g. reloaded from a dump."""
        matrix = np.asarray(rows, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        n = matrix.shape[0]
        return cls(
            rows=matrix,
            labels=np.asarray(labels, dtype=np.int64),
            subjects=np.full(n, "", dtype=object),
            activities=np.full(n, "", dtype=object),
            trials=np.zeros(n, dtype=np.int64),
            sample_rows=np.arange(n, dtype=np.int64),
            groups=np.arange(n, dtype=np.int64),
        )


@dataclass(frozen=True)
class StandardizeParams:
    mean: np.ndarray
    std: np.ndarray

    @property
    def width(self) -> int:
        return int(self.mean.shape[0])

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}
