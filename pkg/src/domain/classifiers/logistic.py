"""Logistic regression by full-batch gradient descent on the mean log-loss."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from src.core.errors import DegenerateData
from src.domain.classifiers.entities import LogRegParams, TrainConfig


def log_loss_and_gradient(weights: np.ndarray, bias: float, rows: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Mean log-loss and its gradient with respect to (weights, bias)."""
    z = rows @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    residual = expit(z) - labels
    grad_w = rows.T @ residual / rows.shape[0]
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def fit(rows: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> LogRegParams:
    if np.unique(labels).size < 2:
        raise DegenerateData("logistic regression needs both classes in the training data")

    # Optimise on z-scored columns, then fold the scaling back into (w, b).
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    scaled = (rows - mean) / std
    y = labels.astype(np.float64)

    w = np.zeros(rows.shape[1], dtype=np.float64)
    b = 0.0
    loss = float("nan")
    for _ in range(cfg.epochs):
        loss, grad_w, grad_b = log_loss_and_gradient(w, b, scaled, y)
        if not np.isfinite(loss):
            raise DegenerateData("logistic regression loss became non-finite")
        w -= cfg.learning_rate * grad_w
        b -= cfg.learning_rate * grad_b

    loss, _, _ = log_loss_and_gradient(w, b, scaled, y)
    if not np.isfinite(loss):
        raise DegenerateData("logistic regression loss became non-finite")
    weights = w / std
    bias = float(b - np.sum(w * mean / std))
    return LogRegParams(weights=weights, bias=bias, learning_rate=cfg.learning_rate, epochs=cfg.epochs, final_loss=loss)


def proba(params: LogRegParams, rows: np.ndarray) -> np.ndarray:
    return expit(rows @ params.weights + params.bias)
