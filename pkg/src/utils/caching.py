# src/utils/caching.py
from __future__ import annotations

import hashlib
import logging
import os
import re
import threading
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from src.core.errors import EmptyInput, ModelFormatError
from src.domain.features.entities import LabeledDataset
from src.domain.ingest.entities import CHANNEL_NAMES, ActivityCode, SubjectId, TrialRecord
from src.domain.ingest.services import label_of

LOG = logging.getLogger(__name__)

# allow only safe chars in filenames; normalize to lowercase
_SAFE = re.compile(r"[^a-z0-9._-]+")

_COHORT_COLUMNS = ["subject", "activity", "trial", "row", *CHANNEL_NAMES, "label"]


def sanitize_key(key: str) -> str:
    return _SAFE.sub("_", key.lower())


def ensure_dir(root: str | Path) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    return root


def cache_file_path(root: str | Path, key: str, ext: str = "csv") -> Path:
    root = ensure_dir(root)
    return root / f"{sanitize_key(key)}.{ext}"


def _atomic_write_csv(frame: pd.DataFrame, target: Path) -> Path:
    """Write to .tmp then os.replace so readers never see a partial file."""
    tmp = target.with_suffix(f"{target.suffix}.{os.getpid()}.{threading.get_ident()}.tmp")
    frame.to_csv(tmp, index=False, lineterminator="\n")
    os.replace(tmp, target)
    return target


# -------- cohort cache --------


def cohort_cache_key(dataset_root: str | Path, subjects: Iterable[SubjectId], decimation: int) -> str:
    names = ",".join(sorted(str(s) for s in subjects))
    digest = hashlib.sha256(f"{Path(dataset_root).resolve().as_posix()}|{names}|d={decimation}".encode("utf-8")).hexdigest()[:16]
    return f"cohort_{digest}"


def save_cohort(
    root: str | Path,
    dataset_root: str | Path,
    subjects: Iterable[SubjectId],
    decimation: int,
    trials: Sequence[TrialRecord],
) -> Path:
    """Store parsed trials as ``subject,activity,trial,row,c1..c9,label``."""
    if not trials:
        raise EmptyInput("nothing to cache: no trials")
    sizes = np.array([len(t) for t in trials], dtype=np.int64)
    frame = pd.DataFrame(np.vstack([t.counts for t in trials]), columns=list(CHANNEL_NAMES))
    frame.insert(0, "subject", np.repeat([str(t.subject) for t in trials], sizes))
    frame.insert(1, "activity", np.repeat([str(t.activity) for t in trials], sizes))
    frame.insert(2, "trial", np.repeat([t.trial for t in trials], sizes))
    frame.insert(3, "row", np.concatenate([np.arange(size) for size in sizes]))
    frame["label"] = np.repeat([label_of(t.activity) for t in trials], sizes)
    path = _atomic_write_csv(frame, cache_file_path(root, cohort_cache_key(dataset_root, subjects, decimation)))
    LOG.info("Cached %d trials (%d rows) at %s", len(trials), len(frame), path)
    return path


def load_cohort_cache(
    root: str | Path,
    dataset_root: str | Path,
    subjects: Iterable[SubjectId],
    decimation: int,
) -> Optional[list[TrialRecord]]:
    """
    Reload a cached cohort in its original trial order.
    Returns None on a cache miss or a corrupt file (the corrupt file is removed).
    """
    path = cache_file_path(root, cohort_cache_key(dataset_root, subjects, decimation))
    if not path.exists():
        return None
    try:
        frame = pd.read_csv(
            path,
            dtype={"subject": str, "activity": str, "trial": np.int64, "row": np.int64, "label": np.int64}
            | {name: np.int64 for name in CHANNEL_NAMES},
        )
        if list(frame.columns) != _COHORT_COLUMNS or frame.empty:
            raise ValueError(f"unexpected columns {list(frame.columns)}")
        records = _records_from_frame(frame, path)
    except (ValueError, KeyError, pd.errors.ParserError) as exc:
        LOG.warning("Discarding unreadable cohort cache %s: %s", path, exc)
        try:
            path.unlink()
        except OSError:
            pass
        return None
    LOG.info("Loaded %d trials from cohort cache %s", len(records), path)
    return records


def _records_from_frame(frame: pd.DataFrame, path: Path) -> list[TrialRecord]:
    keys = frame[["subject", "activity", "trial"]]
    boundaries = np.flatnonzero((keys != keys.shift()).any(axis=1).to_numpy())
    ends = [*boundaries[1:], len(frame)]
    counts = frame[list(CHANNEL_NAMES)].to_numpy(dtype=np.int64)
    records: list[TrialRecord] = []
    for start, end in zip(boundaries, ends):
        subject = SubjectId.parse(frame.at[start, "subject"])
        activity = ActivityCode.parse(frame.at[start, "activity"])
        trial = int(frame.at[start, "trial"])
        source = Path(str(subject)) / f"{activity}_{subject}_R{trial:02d}.txt"
        records.append(
            TrialRecord(
                subject=subject,
                activity=activity,
                trial=trial,
                counts=np.ascontiguousarray(counts[start:end]),
                source_path=f"{path}#{source.as_posix()}",
            )
        )
    return records


# -------- dataset dumps --------


def save_dataset(path: str | Path, data: LabeledDataset) -> Path:
    """Write ``f1..fd,label``; floats keep full precision via repr-style formatting."""
    target = Path(path)
    ensure_dir(target.parent)
    frame = pd.DataFrame(data.rows, columns=[f"f{i + 1}" for i in range(data.width)])
    frame["label"] = data.labels
    return _atomic_write_csv(frame, target)


def load_dataset(path: str | Path, *, require_labels: bool = True) -> LabeledDataset:
    """Read a ``f1..fd[,label]`` dump; without labels every row is labelled 0."""
    source = Path(path)
    if not source.exists():
        raise ModelFormatError(f"Dataset file not found: {source}")
    try:
        frame = pd.read_csv(source, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"Unreadable dataset file {source}: {exc}") from exc

    features = [c for c in frame.columns if re.fullmatch(r"f\d+", str(c))]
    expected = [f"f{i + 1}" for i in range(len(features))]
    if not features or features != expected:
        raise ModelFormatError(f"{source}: expected feature columns f1..fd, got {list(frame.columns)}")
    if require_labels and "label" not in frame.columns:
        raise ModelFormatError(f"{source}: missing 'label' column")
    try:
        rows = frame[features].to_numpy(dtype=np.float64)
        labels = frame["label"].to_numpy(dtype=np.int64) if "label" in frame.columns else np.zeros(len(frame), dtype=np.int64)
        return LabeledDataset.from_arrays(rows, labels)
    except ValueError as exc:
        raise ModelFormatError(f"{source}: {exc}") from exc
