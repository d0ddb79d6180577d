"""Exact k-nearest-neighbour voting with Euclidean distance.

Neighbours are the k training rows with the smallest squared distance; equal
distances are resolved in favour of the lower training-row index. The brute
and k-d tree searches both return exactly that set.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial import cKDTree

from src.domain.classifiers.entities import KnnAlgorithm, KnnParams, TrainConfig

LOG = logging.getLogger(__name__)

_AUTO_KDTREE_MIN_ROWS = 2_000
_AUTO_KDTREE_MAX_WIDTH = 16
# Radius inflation so the ball query never misses a boundary tie.
_RADIUS_REL = 1e-9
_RADIUS_ABS = 1e-12


def fit(rows: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> KnnParams:
    k = cfg.k
    n = rows.shape[0]
    if k > n:
        clamped = n if n % 2 else n - 1
        LOG.warning("KNN k=%d exceeds %d training rows; using k=%d", k, n, clamped)
        k = max(clamped, 1)
    return KnnParams(
        rows=np.ascontiguousarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        k=k,
        algorithm=cfg.knn_algorithm,
        block_size=cfg.knn_block_size,
    )


def squared_distances(train: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from one query row to every training row."""
    diff = train - query
    total = diff[:, 0] * diff[:, 0]
    for column in range(1, diff.shape[1]):
        total += diff[:, column] * diff[:, column]
    return total


def select_nearest(d2: np.ndarray, k: int, candidates: np.ndarray | None = None) -> np.ndarray:
    """Indices of the k smallest distances, ties broken by lower index.

    ``candidates`` (ascending training indices) restricts the search; ``d2``
    is then aligned with it.
    """
    index = np.arange(d2.shape[0]) if candidates is None else candidates
    if d2.shape[0] > k:
        kth = np.partition(d2, k - 1)[k - 1]
        keep = np.flatnonzero(d2 <= kth)
        d2 = d2[keep]
        index = index[keep]
    order = np.argsort(d2, kind="stable")[:k]
    return index[order]


def resolve_algorithm(params: KnnParams) -> KnnAlgorithm:
    if params.algorithm != "auto":
        return params.algorithm
    n, d = params.rows.shape
    if n >= _AUTO_KDTREE_MIN_ROWS and d <= _AUTO_KDTREE_MAX_WIDTH:
        return "kdtree"
    return "brute"


def neighbors(params: KnnParams, rows: np.ndarray) -> np.ndarray:
    """(m, k) neighbour indices for each query row, in query order."""
    queries = np.ascontiguousarray(rows, dtype=np.float64)
    if queries.shape[0] == 0:
        return np.zeros((0, params.k), dtype=np.int64)
    if resolve_algorithm(params) == "kdtree":
        return _neighbors_kdtree(params, queries)
    return _neighbors_brute(params, queries)


def _neighbors_brute(params: KnnParams, queries: np.ndarray) -> np.ndarray:
    train = params.rows
    out = np.empty((queries.shape[0], params.k), dtype=np.int64)
    for position, query in enumerate(queries):
        out[position] = select_nearest(squared_distances(train, query), params.k)
    return out


def _neighbors_kdtree(params: KnnParams, queries: np.ndarray) -> np.ndarray:
    train = params.rows
    k = params.k
    tree = cKDTree(train)
    want = min(k + 1, train.shape[0])
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    for start in range(0, queries.shape[0], params.block_size):
        chunk = queries[start : start + params.block_size]
        dist, idx = tree.query(chunk, k=want, workers=-1)
        dist = dist.reshape(chunk.shape[0], -1)
        idx = idx.reshape(chunk.shape[0], -1)
        radii = dist[:, k - 1] * (1.0 + _RADIUS_REL) + _RADIUS_ABS
        # Clear rows: nothing outside the first k can tie the k-th distance.
        clear = dist[:, k] > radii if want > k else np.ones(chunk.shape[0], dtype=bool)

        rows = np.flatnonzero(clear)
        if rows.size:
            candidates = np.sort(idx[rows, :k], axis=1)
            diff = train[candidates] - chunk[rows, None, :]
            d2 = diff[..., 0] * diff[..., 0]
            for column in range(1, diff.shape[2]):
                d2 += diff[..., column] * diff[..., column]
            order = np.argsort(d2, axis=1, kind="stable")
            out[start + rows] = np.take_along_axis(candidates, order, axis=1)

        tied = np.flatnonzero(~clear)
        if tied.size:
            balls = tree.query_ball_point(chunk[tied], radii[tied], workers=-1)
            for offset, members in zip(tied, balls):
                candidates = np.sort(np.asarray(members, dtype=np.int64))
                d2 = squared_distances(train[candidates], chunk[offset])
                out[start + offset] = select_nearest(d2, k, candidates)
    return out


def proba(params: KnnParams, rows: np.ndarray) -> np.ndarray:
    """Fraction of the k neighbours labelled 1."""
    idx = neighbors(params, rows)
    return params.labels[idx].mean(axis=1)
