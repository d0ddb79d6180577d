"""Brute-force and k-d tree neighbour searches agree with an exhaustive sort."""

import numpy as np
import pytest

from src.domain.classifiers import knn
from src.domain.classifiers.entities import TrainConfig


def _exhaustive(rows: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    d2 = knn.squared_distances(rows, query)
    return np.lexsort((np.arange(rows.shape[0]), d2))[:k]


def _instances(seed: int, count: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 201))
        d = int(rng.integers(1, 10))
        k = int(rng.choice([1, 3, 5, 7, 9]))
        if rng.random() < 0.5:
            # Small integer grid: many exact distance ties.
            rows = rng.integers(-3, 4, size=(n, d)).astype(np.float64)
            queries = rng.integers(-3, 4, size=(15, d)).astype(np.float64)
        else:
            rows = rng.normal(size=(n, d))
            queries = rng.normal(size=(15, d))
        labels = rng.integers(0, 2, size=n)
        yield rows, labels, queries, k


@pytest.mark.slow
def test_knn_searches_match_exhaustive_oracle():
    for rows, labels, queries, k in _instances(seed=7, count=200):
        brute = knn.fit(rows, labels, TrainConfig("knn", k=k, knn_algorithm="brute"))
        kdtree = knn.fit(rows, labels, TrainConfig("knn", k=k, knn_algorithm="kdtree", knn_block_size=4))
        expected = np.vstack([_exhaustive(rows, q, brute.k) for q in queries])

        np.testing.assert_array_equal(knn.neighbors(brute, queries), expected)
        np.testing.assert_array_equal(knn.neighbors(kdtree, queries), expected)
        np.testing.assert_array_equal(knn.proba(brute, queries), knn.proba(kdtree, queries))


def test_auto_algorithm_switches_on_size():
    small = knn.fit(np.zeros((10, 3)), np.zeros(10, dtype=np.int64), TrainConfig("knn", k=3))
    large = knn.fit(np.zeros((5000, 3)), np.zeros(5000, dtype=np.int64), TrainConfig("knn", k=3))
    assert knn.resolve_algorithm(small) == "brute"
    assert knn.resolve_algorithm(large) == "kdtree"


def test_select_nearest_breaks_ties_by_index():
    d2 = np.array([4.0, 1.0, 1.0, 0.0, 1.0])
    np.testing.assert_array_equal(knn.select_nearest(d2, 3), [3, 1, 2])


def test_empty_query_block():
    params = knn.fit(np.eye(3), np.array([0, 1, 0]), TrainConfig("knn", k=1))
    assert knn.neighbors(params, np.zeros((0, 3))).shape == (0, 1)


def test_kdtree_handles_clear_and_tied_queries_in_one_block():
    rows = np.array([[0.0], [2.0], [-2.0], [5.0], [1.0]])
    labels = np.array([0, 1, 1, 0, 1])
    # Queries with and without a distance tie at the k-th neighbour.
    queries = np.array([[0.0], [1.5], [3.5], [-1.0]])
    for k in (1, 3, 5):
        brute = knn.fit(rows, labels, TrainConfig("knn", k=k, knn_algorithm="brute"))
        kdtree = knn.fit(rows, labels, TrainConfig("knn", k=k, knn_algorithm="kdtree"))
        expected = np.vstack([_exhaustive(rows, q, k) for q in queries])
        np.testing.assert_array_equal(knn.neighbors(brute, queries), expected)
        np.testing.assert_array_equal(knn.neighbors(kdtree, queries), expected)
