"""Two-class linear discriminant analysis with a shared (pooled) covariance."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from src.core.errors import DegenerateData
from src.domain.classifiers.entities import LdaParams, TrainConfig

RIDGE_FACTOR = 1e-6


def fit(rows: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> LdaParams:
    n, d = rows.shape
    counts = np.array([np.sum(labels == 0), np.sum(labels == 1)], dtype=np.float64)
    if (counts == 0).any():
        raise DegenerateData("LDA needs both classes in the training data")

    means = np.vstack([rows[labels == c].mean(axis=0) for c in (0, 1)])
    centered = rows - means[labels]
    pooled = centered.T @ centered / max(n - 2, 1)

    # Ridge keeps constant columns (common in decimated cohorts) invertible.
    trace = float(np.trace(pooled))
    ridge = RIDGE_FACTOR * trace / d if trace > 0 else RIDGE_FACTOR
    try:
        cov_inv = np.linalg.inv(pooled + ridge * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise DegenerateData(f"LDA pooled covariance is singular: {exc}") from exc
    if not np.isfinite(cov_inv).all():
        raise DegenerateData("LDA pooled covariance inverse is not finite")

    return LdaParams(means=means, cov_inv=cov_inv, log_priors=np.log(counts / n), ridge=ridge)


def discriminants(params: LdaParams, rows: np.ndarray) -> np.ndarray:
    """Linear discriminant score per class, shape (n, 2)."""
    projected = params.means @ params.cov_inv  # (2, d)
    offsets = -0.5 * np.sum(projected * params.means, axis=1) + params.log_priors
    return rows @ projected.T + offsets


def proba(params: LdaParams, rows: np.ndarray) -> np.ndarray:
    scores = discriminants(params, rows)
    return expit(scores[:, 1] - scores[:, 0])
