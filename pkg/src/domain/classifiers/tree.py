"""CART classification tree with Gini impurity.

Candidate thresholds are midpoints between consecutive distinct sorted values.
Among equally good splits the lowest feature index wins, then the lowest
threshold. A node is only split when the split strictly lowers the weighted
Gini impurity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.domain.classifiers.entities import TrainConfig, TreeParams


@dataclass(frozen=True)
class _Split:
    feature: int
    threshold: float
    weighted_gini: float


def gini(positives: float, total: float) -> float:
    if total <= 0:
        return 0.0
    p = positives / total
    return 2.0 * p * (1.0 - p)


def midpoint(lo: float, hi: float) -> float:
    """Finite threshold with lo <= t < hi for finite lo < hi."""
    mid = lo / 2.0 + hi / 2.0
    return mid if lo <= mid < hi else lo


def best_split(rows: np.ndarray, labels: np.ndarray) -> _Split | None:
    """Lowest weighted-Gini split of a node, or None when no split exists."""
    n = rows.shape[0]
    best: _Split | None = None
    for feature in range(rows.shape[1]):
        order = np.argsort(rows[:, feature], kind="stable")
        xs = rows[order, feature]
        ys = labels[order].astype(np.float64)
        boundaries = np.flatnonzero(xs[1:] != xs[:-1])
        if boundaries.size == 0:
            continue
        left_n = (boundaries + 1).astype(np.float64)
        left_pos = np.cumsum(ys)[boundaries]
        right_n = n - left_n
        right_pos = ys.sum() - left_pos
        # n_side * gini_side = 2 * pos * (n_side - pos) / n_side
        weighted = (
            2.0 * left_pos * (left_n - left_pos) / left_n + 2.0 * right_pos * (right_n - right_pos) / right_n
        ) / n
        at = int(np.argmin(weighted))
        score = float(weighted[at])
        if best is None or score < best.weighted_gini:
            i = int(boundaries[at])
            best = _Split(feature=feature, threshold=midpoint(float(xs[i]), float(xs[i + 1])), weighted_gini=score)
    return best


def fit(rows: np.ndarray, labels: np.ndarray, cfg: TrainConfig) -> TreeParams:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    n_samples: list[int] = []
    impurity: list[float] = []

    def _new_node(index: np.ndarray) -> int:
        positives = float(labels[index].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(positives / index.size)
        n_samples.append(int(index.size))
        impurity.append(gini(positives, index.size))
        return len(feature) - 1

    root = _new_node(np.arange(rows.shape[0]))
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(rows.shape[0]), 0)]
    while stack:
        node, index, depth = stack.pop()
        if impurity[node] == 0.0 or index.size < cfg.min_samples_split:
            continue
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            continue
        split = best_split(rows[index], labels[index])
        if split is None or not split.weighted_gini < impurity[node]:
            continue
        goes_left = rows[index, split.feature] <= split.threshold
        left_index, right_index = index[goes_left], index[~goes_left]
        if left_index.size == 0 or right_index.size == 0:
            continue
        # Equal class shares on both sides: no Gini decrease.
        if int(labels[left_index].sum()) * index.size == int(labels[index].sum()) * left_index.size:
            continue
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = _new_node(left_index)
        right[node] = _new_node(right_index)
        # Right pushed first so the left subtree is expanded first.
        stack.append((right[node], right_index, depth + 1))
        stack.append((left[node], left_index, depth + 1))

    return TreeParams(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int64),
        impurity=np.array(impurity, dtype=np.float64),
        max_depth=cfg.max_depth,
        min_samples_split=cfg.min_samples_split,
    )


def apply(params: TreeParams, rows: np.ndarray) -> np.ndarray:
    """Leaf node index reached by every row."""
    nodes = np.zeros(rows.shape[0], dtype=np.int64)
    active = params.feature[nodes] >= 0
    while active.any():
        current = nodes[active]
        goes_left = rows[active, params.feature[current]] <= params.threshold[current]
        nodes[active] = np.where(goes_left, params.left[current], params.right[current])
        active = params.feature[nodes] >= 0
    return nodes


def proba(params: TreeParams, rows: np.ndarray) -> np.ndarray:
    return params.value[apply(params, rows)]
