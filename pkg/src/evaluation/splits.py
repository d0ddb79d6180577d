from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.core.errors import BadConfig, BadK, DegenerateStratum

# Guards floor(ratio * size) against products like 0.29 * 100 = 28.999999999999996.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class SplitPlan:
    train: np.ndarray
    test: np.ndarray
    seed: int
    ratio: float

    def to_dict(self) -> dict[str, Any]:
        return {"train_rows": int(self.train.size), "test_rows": int(self.test.size), "seed": self.seed, "ratio": self.ratio}


@dataclass(frozen=True, eq=False)
class FoldPlan:
    folds: tuple[np.ndarray, ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_indices(self, fold: int) -> np.ndarray:
        others = [f for i, f in enumerate(self.folds) if i != fold]
        return np.sort(np.concatenate(others)) if others else np.zeros(0, dtype=np.int64)

    def test_indices(self, fold: int) -> np.ndarray:
        return self.folds[fold]


def _units(n: int, strata: Any | None, groups: Any | None) -> tuple[np.ndarray, np.ndarray | None, list[np.ndarray] | None]:
    """Split units (rows, or whole groups in first-appearance order) with per-unit strata."""
    strata_arr = None if strata is None else np.asarray(strata).ravel()
    if groups is None:
        return np.arange(n, dtype=np.int64), strata_arr, None
    group_arr = np.asarray(groups).ravel()
    if group_arr.shape[0] != n:
        raise BadConfig(f"groups has {group_arr.shape[0]} entries for {n} rows")
    _, first, inverse = np.unique(group_arr, return_index=True, return_inverse=True)
    rank = np.empty(first.shape[0], dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
    unit_of_row = rank[inverse.ravel()]
    order = np.argsort(unit_of_row, kind="stable")
    members = np.split(order, np.cumsum(np.bincount(unit_of_row))[:-1])
    unit_strata = None if strata_arr is None else strata_arr[np.sort(first)]
    return np.arange(first.shape[0], dtype=np.int64), unit_strata, members


def _strata_blocks(units: np.ndarray, unit_strata: np.ndarray | None, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffled unit indices per stratum, strata in sorted order."""
    if unit_strata is None:
        return [rng.permutation(units)]
    values = np.unique(unit_strata)
    if values.shape[0] < 2:
        raise DegenerateStratum(
            f"stratified split needs at least two classes, found only {values.tolist()}; disable stratification"
        )
    return [rng.permutation(units[unit_strata == value]) for value in values]


def _expand(unit_ids: np.ndarray, members: list[np.ndarray] | None) -> np.ndarray:
    if members is None:
        return np.sort(unit_ids)
    if unit_ids.size == 0:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate([members[u] for u in unit_ids]))


def train_test_split(
    n: int,
    ratio: float,
    seed: int,
    strata: Any | None = None,
    *,
    groups: Any | None = None,
) -> SplitPlan:
    """Shuffled split keeping floor(ratio * size) units of each stratum for training.

    With ``groups`` every group (e.g. one trial) lands wholly in train or test.
    """
    if not 0.0 < ratio < 1.0:
        raise BadConfig(f"split ratio must lie strictly between 0 and 1, got {ratio}")
    if n < 2:
        raise BadConfig(f"train_test_split needs n >= 2, got {n}")
    if strata is not None and np.asarray(strata).ravel().shape[0] != n:
        raise BadConfig("strata length does not match n")

    rng = np.random.default_rng(seed)
    units, unit_strata, members = _units(n, strata, groups)
    train_units: list[np.ndarray] = []
    test_units: list[np.ndarray] = []
    for block in _strata_blocks(units, unit_strata, rng):
        cut = math.floor(ratio * block.shape[0] + _FLOOR_EPS)
        train_units.append(block[:cut])
        test_units.append(block[cut:])
    return SplitPlan(
        train=_expand(np.concatenate(train_units), members),
        test=_expand(np.concatenate(test_units), members),
        seed=seed,
        ratio=ratio,
    )


def k_fold(n: int, k: int, seed: int, strata: Any | None = None, *, groups: Any | None = None) -> FoldPlan:
    """K disjoint folds covering 0..n-1 whose unit counts differ by at most one.

    Units are dealt round-robin after shuffling each stratum, so each fold
    also carries a near-equal share of every class.
    """
    units, unit_strata, members = _units(n, strata, groups)
    if not 2 <= k <= units.shape[0]:
        raise BadK(f"K must satisfy 2 <= K <= {units.shape[0]}, got {k}")
    if strata is not None and np.asarray(strata).ravel().shape[0] != n:
        raise BadConfig("strata length does not match n")

    rng = np.random.default_rng(seed)
    dealt = np.concatenate(_strata_blocks(units, unit_strata, rng))
    assignment = np.arange(dealt.shape[0]) % k
    folds = tuple(_expand(dealt[assignment == fold], members) for fold in range(k))
    return FoldPlan(folds=folds, seed=seed)
