from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import TYPE_CHECKING, Any, Literal, Union

import numpy as np

from src.core.errors import BadConfig

if TYPE_CHECKING:
    from src.config.settings import Settings

ClassifierKind = Literal["logreg", "lda", "knn", "tree", "gnb"]
KnnAlgorithm = Literal["auto", "brute", "kdtree"]

# Enum order doubles as the tie-break order for CV model selection.
CLASSIFIER_KINDS: tuple[ClassifierKind, ...] = ("logreg", "lda", "knn", "tree", "gnb")
DISPLAY_NAMES: dict[str, str] = {"logreg": "LR", "lda": "LDA", "knn": "KNN", "tree": "DT", "gnb": "NB"}
TUNE_K_GRID: tuple[int, ...] = (1, 3, 5, 7, 9)


def parse_kind(value: str) -> ClassifierKind:
    aliases = {
        "lr": "logreg",
        "logreg": "logreg",
        "logistic": "logreg",
        "lda": "lda",
        "knn": "knn",
        "dt": "tree",
        "tree": "tree",
        "nb": "gnb",
        "gnb": "gnb",
        "naive_bayes": "gnb",
    }
    kind = aliases.get(value.strip().lower())
    if kind is None:
        raise BadConfig(f"Unknown classifier kind {value!r}; expected one of {', '.join(CLASSIFIER_KINDS)}")
    return kind  # type: ignore[return-value]


@dataclass(frozen=True)
class TrainConfig:
    kind: ClassifierKind
    seed: int = 42
    k: int = 5
    knn_algorithm: KnnAlgorithm = "auto"
    knn_block_size: int = 2048
    learning_rate: float = 0.1
    epochs: int = 500
    max_depth: int | None = 12
    min_samples_split: int = 2

    def __post_init__(self) -> None:
        if self.kind not in CLASSIFIER_KINDS:
            raise BadConfig(f"Unknown classifier kind {self.kind!r}")
        if self.k < 1 or self.k % 2 == 0:
            raise BadConfig(f"KNN k must be a positive odd integer, got {self.k}")
        if self.learning_rate <= 0 or self.epochs < 1:
            raise BadConfig("logistic regression needs learning_rate > 0 and epochs >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise BadConfig(f"max_depth must be >= 0 or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise BadConfig(f"min_samples_split must be >= 2, got {self.min_samples_split}")

    @property
    def label(self) -> str:
        if self.kind == "knn":
            return f"KNN(k={self.k})"
        return DISPLAY_NAMES[self.kind]

    def with_kind(self, kind: ClassifierKind) -> TrainConfig:
        return replace(self, kind=kind)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_settings(cls, kind: ClassifierKind, settings: Settings, *, seed: int | None = None, k: int | None = None) -> TrainConfig:
        return cls(
            kind=kind,
            seed=settings.base_seed if seed is None else seed,
            k=settings.knn_k if k is None else k,
            knn_algorithm=settings.knn_algorithm,
            knn_block_size=settings.knn_block_size,
            learning_rate=settings.logreg_learning_rate,
            epochs=settings.logreg_epochs,
            max_depth=settings.tree_max_depth,
            min_samples_split=settings.tree_min_samples_split,
        )


# --------------------------------------------------------------------------------------
# Parameter bundles
# --------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LogRegParams:
    weights: np.ndarray
    bias: float
    learning_rate: float
    epochs: int
    final_loss: float


@dataclass(frozen=True, eq=False)
class LdaParams:
    means: np.ndarray  # (2, d)
    cov_inv: np.ndarray  # (d, d)
    log_priors: np.ndarray  # (2,)
    ridge: float


@dataclass(frozen=True, eq=False)
class KnnParams:
    rows: np.ndarray
    labels: np.ndarray
    k: int
    algorithm: KnnAlgorithm
    block_size: int


@dataclass(frozen=True, eq=False)
class TreeParams:
    """Flat CART tree; node 0 is the root, leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class-1 frequency among training rows at the node
    n_samples: np.ndarray
    impurity: np.ndarray
    max_depth: int | None
    min_samples_split: int

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, level = stack.pop()
            best = max(best, level)
            if self.feature[node] >= 0:
                stack.append((int(self.left[node]), level + 1))
                stack.append((int(self.right[node]), level + 1))
        return best


@dataclass(frozen=True, eq=False)
class GnbParams:
    means: np.ndarray  # (2, d)
    variances: np.ndarray  # (2, d), epsilon already added
    log_priors: np.ndarray  # (2,), -inf for an absent class
    epsilon: float


ModelParams = Union[LogRegParams, LdaParams, KnnParams, TreeParams, GnbParams]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: ClassifierKind
    width: int
    params: ModelParams
    config: TrainConfig

    @property
    def label(self) -> str:
        return self.config.label
