"""Validated options of one ``run`` invocation and their JSON mirror."""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from src.config.settings import Settings
from src.core.errors import BadConfig, BadK, ConflictingFlags
from src.domain.classifiers.entities import TUNE_K_GRID
from src.experiments.entities import COHORTS, EXPERIMENT_IDS

RUN_CONFIG_FORMAT = "fallbench-run"
RUN_CONFIG_VERSION = 1

# Settings fields that change classifier behaviour and so belong in the replay file.
CLASSIFIER_SETTINGS = (
    "knn_algorithm",
    "knn_block_size",
    "logreg_learning_rate",
    "logreg_epochs",
    "tree_max_depth",
    "tree_min_samples_split",
)
_EXPERIMENT_FLAGS = ("decimation", "calibrated", "standardize", "tune_k", "stratify", "split_by_trial", "folds", "split_ratio", "k")
_RANGE_RE = re.compile(r"^(\d+)\s*(?:\.\.|-)\s*(\d+)$")


@dataclass(frozen=True)
class RunConfig:
    root: str
    experiments: tuple[int, ...] = EXPERIMENT_IDS
    base_seed: int = 42
    decimation: int = 1
    calibrated: bool = True
    standardize: bool = False
    tune_k: bool = False
    stratify: bool = True
    split_by_trial: bool = False
    folds: int = 10
    split_ratio: float = 0.8
    k: int = 5
    subjects: dict[str, tuple[str, ...]] = field(default_factory=dict)
    sweep_single_subjects: bool = False
    parallel: bool = False
    out_dir: str = "out"
    classifiers: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.experiments:
            raise BadConfig("no experiments selected")
        for experiment_id in self.experiments:
            if experiment_id not in EXPERIMENT_IDS:
                raise BadConfig(f"experiment ids must lie in 1..6, got {experiment_id}")
        if self.decimation < 1:
            raise BadConfig(f"--decimation must be >= 1, got {self.decimation}")
        if self.folds < 2:
            raise BadK(f"--folds must be >= 2, got {self.folds}")
        if not 0.0 < self.split_ratio < 1.0:
            raise BadConfig(f"split ratio must lie strictly between 0 and 1, got {self.split_ratio}")
        if self.k < 1 or self.k % 2 == 0:
            raise BadConfig(f"--k must be a positive odd integer, got {self.k}")
        unknown = set(self.subjects) - {*COHORTS, "*"}
        if unknown:
            raise BadConfig(f"unknown cohort in --subjects: {', '.join(sorted(unknown))}")
        unknown = set(self.classifiers) - set(CLASSIFIER_SETTINGS)
        if unknown:
            raise BadConfig(f"unknown classifier settings: {', '.join(sorted(unknown))}")

    def experiment_flags(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in _EXPERIMENT_FLAGS}

    def seeds(self) -> dict[str, int]:
        return {str(i): self.base_seed + i for i in sorted(self.experiments)}

    def to_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["experiments"] = list(self.experiments)
        payload["subjects"] = {cohort: list(ids) for cohort, ids in sorted(self.subjects.items())}
        payload["seeds"] = self.seeds()
        payload["k_grid"] = list(TUNE_K_GRID) if self.tune_k else None
        payload["format"] = RUN_CONFIG_FORMAT
        payload["version"] = RUN_CONFIG_VERSION
        return payload

    def settings_overrides(self) -> dict[str, Any]:
        """Settings fields this run pins, None values included."""
        return {"dataset_root": self.root, **self.classifiers}


def defaults_from_settings(settings: Settings) -> dict[str, Any]:
    return {
        "root": settings.dataset_root,
        "base_seed": settings.base_seed,
        "decimation": settings.decimation,
        "calibrated": settings.calibrated,
        "standardize": settings.standardize,
        "stratify": settings.stratify,
        "folds": settings.folds,
        "split_ratio": settings.split_ratio,
        "k": settings.knn_k,
        "out_dir": settings.output_dir,
        "classifiers": {name: getattr(settings, name) for name in CLASSIFIER_SETTINGS},
    }


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Values from a ``config.json`` written by an earlier run."""
    source = Path(path)
    try:
        payload = json.loads(source.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise BadConfig(f"--config file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"--config file is not valid JSON: {source}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != RUN_CONFIG_FORMAT:
        raise BadConfig(f"{source} is not a fallbench run config")
    if payload.get("version") != RUN_CONFIG_VERSION:
        raise BadConfig(f"{source}: unsupported run config version {payload.get('version')!r}")
    known = {f.name for f in fields(RunConfig)}
    values = {key: value for key, value in payload.items() if key in known}
    if "experiments" in values:
        values["experiments"] = tuple(int(i) for i in values["experiments"])
    if "subjects" in values:
        values["subjects"] = {cohort: tuple(ids) for cohort, ids in (values["subjects"] or {}).items()}
    return values


def build_run_config(defaults: Mapping[str, Any], file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> RunConfig:
    """Merge with precedence defaults < config file < flags, then check flag combinations."""
    merged: dict[str, Any] = dict(defaults)
    classifiers = dict(defaults.get("classifiers") or {})
    for layer in (file_values, {k: v for k, v in flag_values.items() if v is not None}):
        for key, value in layer.items():
            if key == "classifiers":
                classifiers.update(value or {})
            else:
                merged[key] = value
    merged["classifiers"] = classifiers

    explicit = {k for k, v in flag_values.items() if v is not None}
    if flag_values.get("tune_k") and "k" in explicit:
        raise ConflictingFlags("--tune-k", "--k", "tuning chooses k from the grid 1,3,5,7,9")
    if flag_values.get("sweep_single_subjects"):
        if "subjects" in explicit:
            raise ConflictingFlags("--sweep-single-subjects", "--subjects", "the sweep picks every subject in turn")
        if "experiments" in explicit:
            raise ConflictingFlags("--sweep-single-subjects", "--experiments", "the sweep always runs experiment 1")
    if not merged.get("root"):
        raise BadConfig("no dataset root: pass --root or set FALLBENCH_ROOT")
    merged["root"] = str(merged["root"])
    return RunConfig(**merged)


def parse_experiment_ids(values: Iterable[str]) -> tuple[int, ...]:
    """Accepts ``5``, ``1,3,5``, ``1..6`` and ``1-6`` in any mix."""
    ids: set[int] = set()
    for value in values:
        for part in str(value).split(","):
            part = part.strip()
            if not part:
                continue
            match = _RANGE_RE.match(part)
            if match:
                low, high = int(match.group(1)), int(match.group(2))
                if low > high:
                    raise BadConfig(f"empty experiment range {part!r}")
                ids.update(range(low, high + 1))
            elif part.isdigit():
                ids.add(int(part))
            else:
                raise BadConfig(f"not an experiment id: {part!r}")
    for experiment_id in ids:
        if experiment_id not in EXPERIMENT_IDS:
            raise BadConfig(f"experiment ids must lie in 1..6, got {experiment_id}")
    return tuple(sorted(ids))


def parse_subject_overrides(values: Iterable[str]) -> dict[str, tuple[str, ...]]:
    """``SA01,SA02`` applies to every cohort; ``ten=SA01,SA02`` to one cohort."""
    names = {cohort.lower(): cohort for cohort in COHORTS}
    overrides: dict[str, tuple[str, ...]] = {}
    for value in values:
        cohort, sep, ids = str(value).partition("=")
        if not sep:
            cohort, ids = "*", value
        else:
            key = cohort.strip().lower()
            if key not in names:
                raise BadConfig(f"unknown cohort {cohort!r} in --subjects; expected one of {', '.join(COHORTS)}")
            cohort = names[key]
        subjects = tuple(s.strip().upper() for s in ids.split(",") if s.strip())
        if not subjects:
            raise BadConfig(f"--subjects {value!r} names no subject")
        overrides[cohort] = subjects
    return overrides
