"""Versioned JSON persistence for trained models."""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path
from typing import Any

import numpy as np

from src.core.errors import ModelFormatError
from src.domain.classifiers.entities import (
    CLASSIFIER_KINDS,
    GnbParams,
    KnnParams,
    LdaParams,
    LogRegParams,
    TrainConfig,
    TrainedModel,
    TreeParams,
)

MODEL_FORMAT = "fallbench-model"
MODEL_VERSION = 1

_PARAM_TYPES: dict[str, type] = {
    "logreg": LogRegParams,
    "lda": LdaParams,
    "knn": KnnParams,
    "tree": TreeParams,
    "gnb": GnbParams,
}
_INT_ARRAYS = {"labels", "feature", "left", "right", "n_samples"}


def _encode(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        if value.ndim > 1:
            return [_encode(row) for row in value]
        return [_json_number(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _json_number(value: Any) -> Any:
    # JSON has no infinities; an absent-class log-prior is stored as null.
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def _decode_array(name: str, value: Any) -> np.ndarray:
    dtype = np.int64 if name in _INT_ARRAYS else np.float64
    if dtype is np.float64:
        return np.array(_nulls_to_neg_inf(value), dtype=np.float64)
    return np.array(value, dtype=np.int64)


def _nulls_to_neg_inf(value: Any) -> Any:
    if isinstance(value, list):
        return [_nulls_to_neg_inf(v) for v in value]
    return -np.inf if value is None else value


def model_to_dict(model: TrainedModel) -> dict[str, Any]:
    params = {f.name: _encode(getattr(model.params, f.name)) for f in fields(model.params)}
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "width": model.width,
        "config": model.config.to_dict(),
        "params": params,
    }


def model_from_dict(payload: dict[str, Any]) -> TrainedModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"Not a fallbench model file (format={payload.get('format')!r})")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"Unsupported model version {payload.get('version')!r}; expected {MODEL_VERSION}")
    kind = payload.get("kind")
    if kind not in CLASSIFIER_KINDS:
        raise ModelFormatError(f"Unknown model kind {kind!r}")

    param_type = _PARAM_TYPES[kind]
    raw = payload.get("params") or {}
    values: dict[str, Any] = {}
    for f in fields(param_type):
        if f.name not in raw:
            raise ModelFormatError(f"{kind} model is missing parameter {f.name!r}")
        item = raw[f.name]
        values[f.name] = _decode_array(f.name, item) if isinstance(item, list) else item
    try:
        config = TrainConfig(**payload.get("config", {"kind": kind}))
        return TrainedModel(kind=kind, width=int(payload["width"]), params=param_type(**values), config=config)
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelFormatError(f"Malformed {kind} model: {exc}") from exc


def save_model(model: TrainedModel, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(model_to_dict(model), sort_keys=True), encoding="utf-8")
    return target


def load_model(path: str | Path) -> TrainedModel:
    source = Path(path)
    try:
        payload = json.loads(source.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ModelFormatError(f"Model file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"Model file is not valid JSON: {source}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError(f"Model file must hold a JSON object: {source}")
    return model_from_dict(payload)
