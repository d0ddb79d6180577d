from __future__ import annotations

import os
from collections.abc import Callable
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, TypeVar

KnnAlgorithm = Literal["auto", "brute", "kdtree"]
T = TypeVar("T")

_VALID_KNN_ALGORITHMS = {"auto", "brute", "kdtree"}
_PROJECT_ROOT = Path(__file__).resolve().parents[2]
_DEFAULT_CONFIG_PATH = "fallbench.yaml"
_TRUTHY = {"1", "true", "yes", "on", "y"}


def _to_bool(value: Any) -> bool:
    if isinstance(value, (bool, int, float)):
        return bool(value)
    return str(value).strip().lower() in _TRUTHY


def _to_int(value: Any) -> int:
    # "4.0" from an env var or YAML float still counts as 4
    return int(float(str(value).strip()))


def _to_float(value: Any) -> float:
    return float(str(value).strip())


def _to_str(value: Any) -> str:
    return str(value).strip()


_UNLIMITED = {"none", "null", "unlimited"}


def _to_depth(value: Any) -> int | None:
    """Tree depth limit: 0 is a single leaf; a negative value or "unlimited" lifts the limit."""
    if str(value).strip().lower() in _UNLIMITED:
        return None
    depth = _to_int(value)
    return None if depth < 0 else depth


def _lookup(payload: dict[str, Any], dotted: str) -> Any:
    node: Any = payload
    for key in dotted.split("."):
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def _setting(config: dict[str, Any], dotted: str, default: T, cast: Callable[[Any], T], env: str | None = None) -> T:
    """Environment variable, then YAML value, then ``default``; unparsable values fall back."""
    raw = os.getenv(env) if env else None
    if raw is None or not raw.strip():
        raw = _lookup(config, dotted)
    if raw is None:
        return default
    try:
        return cast(raw)
    except (TypeError, ValueError):
        return default


@lru_cache(maxsize=1)
def _load_dotenv_once() -> None:
    if _to_bool(os.getenv("FALLBENCH_SKIP_DOTENV", "")):
        return
    try:
        from dotenv import load_dotenv
    except ImportError:
        return
    env_path = _PROJECT_ROOT / ".env"
    if env_path.exists():
        load_dotenv(env_path, override=False)


@lru_cache(maxsize=1)
def _load_config_file() -> dict[str, Any]:
    """Read ``fallbench.yaml`` (or ``$FALLBENCH_CONFIG``); an absent or broken file means no overrides."""
    location = Path(os.getenv("FALLBENCH_CONFIG", "").strip() or _DEFAULT_CONFIG_PATH)
    if not location.is_absolute():
        location = _PROJECT_ROOT / location
    if not location.is_file():
        return {}
    try:
        import yaml
    except ImportError:
        return {}
    try:
        payload = yaml.safe_load(location.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, yaml.YAMLError):
        return {}
    return payload if isinstance(payload, dict) else {}


@dataclass(frozen=True)
class Settings:
    dataset_root: str = "data/SisFall"
    output_dir: str = "out"
    cache_dir: str = "data/cache"
    cache_enabled: bool = False

    decimation: int = 1
    parse_workers: int = 4
    calibrated: bool = True

    base_seed: int = 42
    folds: int = 10
    split_ratio: float = 0.8
    stratify: bool = True
    standardize: bool = False

    knn_k: int = 5
    knn_algorithm: KnnAlgorithm = "auto"
    knn_block_size: int = 2048
    logreg_learning_rate: float = 0.1
    logreg_epochs: int = 500
    tree_max_depth: int | None = 12
    tree_min_samples_split: int = 2

    log_level: str = "INFO"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    _load_dotenv_once()
    config = _load_config_file()
    defaults = Settings()

    algorithm = _setting(config, "classifiers.knn.algorithm", "auto", _to_str, "FALLBENCH_KNN_ALGORITHM").lower()
    if algorithm not in _VALID_KNN_ALGORITHMS:
        algorithm = "auto"

    return Settings(
        dataset_root=_setting(config, "runtime.paths.dataset_root", defaults.dataset_root, _to_str, "FALLBENCH_ROOT"),
        output_dir=_setting(config, "runtime.paths.output_dir", defaults.output_dir, _to_str, "FALLBENCH_OUTPUT_DIR"),
        cache_dir=_setting(config, "runtime.paths.cache_dir", defaults.cache_dir, _to_str, "FALLBENCH_CACHE_DIR"),
        cache_enabled=_setting(config, "runtime.cache.enabled", defaults.cache_enabled, _to_bool, "FALLBENCH_CACHE"),
        decimation=max(1, _setting(config, "runtime.ingest.decimation", 1, _to_int, "FALLBENCH_DECIMATION")),
        parse_workers=max(1, _setting(config, "runtime.ingest.parse_workers", 4, _to_int, "FALLBENCH_PARSE_WORKERS")),
        calibrated=_setting(config, "runtime.ingest.calibrated", defaults.calibrated, _to_bool),
        base_seed=_setting(config, "experiment.base_seed", defaults.base_seed, _to_int, "FALLBENCH_SEED"),
        folds=_setting(config, "experiment.folds", defaults.folds, _to_int),
        split_ratio=_setting(config, "experiment.split_ratio", defaults.split_ratio, _to_float),
        stratify=_setting(config, "experiment.stratify", defaults.stratify, _to_bool),
        standardize=_setting(config, "experiment.standardize", defaults.standardize, _to_bool),
        knn_k=_setting(config, "classifiers.knn.k", defaults.knn_k, _to_int),
        knn_algorithm=algorithm,  # type: ignore[arg-type]
        knn_block_size=max(1, _setting(config, "classifiers.knn.block_size", defaults.knn_block_size, _to_int)),
        logreg_learning_rate=_setting(config, "classifiers.logreg.learning_rate", defaults.logreg_learning_rate, _to_float),
        logreg_epochs=_setting(config, "classifiers.logreg.epochs", defaults.logreg_epochs, _to_int),
        tree_max_depth=_setting(config, "classifiers.tree.max_depth", defaults.tree_max_depth, _to_depth),
        tree_min_samples_split=_setting(config, "classifiers.tree.min_samples_split", defaults.tree_min_samples_split, _to_int),
        log_level=_setting(config, "logging.level", defaults.log_level, _to_str, "FALLBENCH_LOG_LEVEL").upper(),
    )
