from __future__ import annotations

import logging
import math
import time
from collections.abc import Sequence

import numpy as np

from src.core.errors import EmptyInput, NonFinite, WidthMismatch
from src.domain.features.entities import FEATURE_WIDTH, FeatureMode, LabeledDataset, StandardizeParams
from src.domain.ingest.entities import TrialRecord
from src.domain.ingest.services import calibrate_trial, label_of

__all__ = [
    "svm_magnitude",
    "svm_magnitudes",
    "build_dataset",
    "standardize_fit",
    "standardize_apply",
]

LOG = logging.getLogger(__name__)


def svm_magnitude(x: float, y: float, z: float) -> float:
    """Sum vector magnitude sqrt(x² + y² + z²) of one sensor triplet."""
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise NonFinite(f"svm_magnitude needs finite inputs, got ({x}, {y}, {z})")
    return float(np.hypot(np.hypot(x, y), z))


def svm_magnitudes(channels: np.ndarray) -> np.ndarray:
    """Per-triplet magnitudes of an (n, 3k) matrix, returning (n, k)."""
    values = np.asarray(channels, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] % 3:
        raise ValueError(f"expected (n, 3k) channels, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise NonFinite("svm_magnitudes needs finite inputs")
    triplets = values.reshape(values.shape[0], -1, 3)
    # finite for every finite triplet
    return np.hypot(np.hypot(triplets[..., 0], triplets[..., 1]), triplets[..., 2])


def build_dataset(trials: Sequence[TrialRecord], mode: FeatureMode, calibrated: bool = True) -> LabeledDataset:
    """One row per retained sample, rows ordered trial by trial."""
    if not trials:
        raise EmptyInput("build_dataset needs at least one trial")
    if mode not in FEATURE_WIDTH:
        raise ValueError(f"Unknown feature mode {mode!r}")

    started = time.perf_counter()
    blocks: list[np.ndarray] = []
    for record in trials:
        channels = calibrate_trial(record) if calibrated else record.counts.astype(np.float64)
        blocks.append(svm_magnitudes(channels) if mode == "svm3" else channels)

    sizes = np.array([len(record) for record in trials], dtype=np.int64)
    rows = np.vstack(blocks)
    dataset = LabeledDataset(
        rows=rows,
        labels=np.repeat(np.array([label_of(r.activity) for r in trials], dtype=np.int64), sizes),
        subjects=np.repeat(np.array([str(r.subject) for r in trials], dtype=object), sizes),
        activities=np.repeat(np.array([str(r.activity) for r in trials], dtype=object), sizes),
        trials=np.repeat(np.array([r.trial for r in trials], dtype=np.int64), sizes),
        sample_rows=np.concatenate([np.arange(size, dtype=np.int64) for size in sizes]),
        groups=np.repeat(np.arange(len(trials), dtype=np.int64), sizes),
    )
    LOG.info(
        "Built %s dataset: %d rows x %d features (%s) in %.2fs",
        mode,
        len(dataset),
        dataset.width,
        "calibrated" if calibrated else "raw counts",
        time.perf_counter() - started,
    )
    return dataset


def standardize_fit(train: LabeledDataset | np.ndarray) -> StandardizeParams:
    rows = train.rows if isinstance(train, LabeledDataset) else np.asarray(train, dtype=np.float64)
    if rows.shape[0] == 0:
        raise EmptyInput("standardize_fit needs at least one training row")
    return StandardizeParams(mean=rows.mean(axis=0), std=rows.std(axis=0))


def standardize_apply(params: StandardizeParams, data: LabeledDataset | np.ndarray) -> LabeledDataset | np.ndarray:
    """Column-wise z-score; zero-variance columns pass through unchanged."""
    rows = data.rows if isinstance(data, LabeledDataset) else np.asarray(data, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != params.width:
        raise WidthMismatch(params.width, rows.shape[1] if rows.ndim == 2 else 1)
    varying = params.std > 0
    scaled = rows.astype(np.float64, copy=True)
    scaled[:, varying] = (rows[:, varying] - params.mean[varying]) / params.std[varying]
    if isinstance(data, LabeledDataset):
        return data.with_rows(scaled)
    return scaled
