from __future__ import annotations

import logging
import time
from typing import Callable

import numpy as np

from src.core.errors import DegenerateData, EmptyInput, WidthMismatch
from src.domain.classifiers import knn, lda, logistic, naive_bayes, tree
from src.domain.classifiers.entities import ModelParams, TrainConfig, TrainedModel
from src.domain.features.entities import LabeledDataset

__all__ = ["train", "predict", "predict_proba", "DECISION_THRESHOLD"]

LOG = logging.getLogger(__name__)

# proba strictly above the threshold predicts a fall; exactly 0.5 predicts ADL.
DECISION_THRESHOLD = 0.5

_FITTERS: dict[str, Callable[[np.ndarray, np.ndarray, TrainConfig], ModelParams]] = {
    "logreg": logistic.fit,
    "lda": lda.fit,
    "knn": knn.fit,
    "tree": tree.fit,
    "gnb": naive_bayes.fit,
}
_SCORERS: dict[str, Callable[[ModelParams, np.ndarray], np.ndarray]] = {
    "logreg": logistic.proba,  # type: ignore[dict-item]
    "lda": lda.proba,  # type: ignore[dict-item]
    "knn": knn.proba,  # type: ignore[dict-item]
    "tree": tree.proba,  # type: ignore[dict-item]
    "gnb": naive_bayes.proba,  # type: ignore[dict-item]
}


def train(data: LabeledDataset, cfg: TrainConfig) -> TrainedModel:
    """Fit ``cfg.kind`` on ``data``; deterministic for a given (data, cfg)."""
    if len(data) < 2:
        raise EmptyInput(f"{cfg.label} needs at least 2 training rows, got {len(data)}")
    rows = np.asarray(data.rows, dtype=np.float64)
    if not np.isfinite(rows).all():
        raise DegenerateData(f"{cfg.label} training rows contain non-finite values")
    labels = np.asarray(data.labels, dtype=np.int64)

    started = time.perf_counter()
    params = _FITTERS[cfg.kind](rows, labels, cfg)
    LOG.debug("Trained %s on %d rows x %d in %.2fs", cfg.label, rows.shape[0], rows.shape[1], time.perf_counter() - started)
    return TrainedModel(kind=cfg.kind, width=rows.shape[1], params=params, config=cfg)


def predict_proba(model: TrainedModel, rows: np.ndarray) -> np.ndarray:
    matrix = _as_matrix(model, rows)
    return np.clip(_SCORERS[model.kind](model.params, matrix), 0.0, 1.0)


def predict(model: TrainedModel, rows: np.ndarray) -> np.ndarray:
    return (predict_proba(model, rows) > DECISION_THRESHOLD).astype(np.int64)


def _as_matrix(model: TrainedModel, rows: np.ndarray) -> np.ndarray:
    matrix = np.asarray(rows, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] != model.width:
        raise WidthMismatch(model.width, matrix.shape[-1] if matrix.ndim else 0)
    return matrix
