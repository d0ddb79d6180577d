"""Gaussian naive Bayes with a variance floor."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from src.domain.classifiers.entities import GnbParams, TrainConfig

VAR_SMOOTHING = 1e-9


def fit(rows: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> GnbParams:
    n, d = rows.shape
    max_var = float(rows.var(axis=0).max()) if n else 0.0
    epsilon = VAR_SMOOTHING * max_var if max_var > 0 else VAR_SMOOTHING

    means = np.zeros((2, d), dtype=np.float64)
    variances = np.ones((2, d), dtype=np.float64)
    log_priors = np.full(2, -np.inf, dtype=np.float64)
    for c in (0, 1):
        members = rows[labels == c]
        if members.shape[0] == 0:
            continue
        means[c] = members.mean(axis=0)
        variances[c] = members.var(axis=0) + epsilon
        log_priors[c] = np.log(members.shape[0] / n)
    return GnbParams(means=means, variances=variances, log_priors=log_priors, epsilon=epsilon)


def joint_log_likelihood(params: GnbParams, rows: np.ndarray) -> np.ndarray:
    """log P(c) + sum_j log N(x_j | mu_cj, var_cj), shape (n, 2)."""
    out = np.empty((rows.shape[0], 2), dtype=np.float64)
    for c in (0, 1):
        if not np.isfinite(params.log_priors[c]):
            out[:, c] = -np.inf
            continue
        var = params.variances[c]
        norm = -0.5 * np.sum(np.log(2.0 * np.pi * var))
        out[:, c] = params.log_priors[c] + norm - 0.5 * np.sum((rows - params.means[c]) ** 2 / var, axis=1)
    return out


def log_posteriors(params: GnbParams, rows: np.ndarray) -> np.ndarray:
    jll = joint_log_likelihood(params, rows)
    return jll - logsumexp(jll, axis=1, keepdims=True)


def proba(params: GnbParams, rows: np.ndarray) -> np.ndarray:
    return np.exp(log_posteriors(params, rows)[:, 1])
