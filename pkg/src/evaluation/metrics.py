from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from src.core.errors import EmptyMatrix, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with class 1 (Fall) as the positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def swapped(self) -> ConfusionMatrix:
        """Same predictions scored with class 0 as the positive class."""
        return ConfusionMatrix(tp=self.tn, tn=self.tp, fp=self.fn, fn=self.fp)

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # Names of ratios whose denominator was zero; they are reported as 0.
    undefined: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["undefined"] = list(self.undefined)
        return payload


def confusion(truth: Any, pred: Any) -> ConfusionMatrix:
    t = np.asarray(truth, dtype=np.int64).ravel()
    p = np.asarray(pred, dtype=np.int64).ravel()
    if t.shape[0] != p.shape[0]:
        raise LengthMismatch(t.shape[0], p.shape[0])
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
    )


def _ratio(numerator: int, denominator: int) -> float | None:
    return None if denominator == 0 else numerator / denominator


def metrics(cm: ConfusionMatrix) -> MetricSet:
    if cm.total == 0:
        raise EmptyMatrix("metrics need at least one evaluated row")
    undefined: list[str] = []
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None:
        undefined.append("precision")
    if recall is None:
        undefined.append("recall")
    p = precision or 0.0
    r = recall or 0.0
    if p + r == 0:
        f1 = 0.0
        undefined.append("f1")
    else:
        f1 = 2.0 * p * r / (p + r)
    return MetricSet(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=p,
        recall=r,
        f1=f1,
        undefined=tuple(undefined),
    )


def per_class_metrics(truth: Any, pred: Any) -> dict[int, MetricSet]:
    """MetricSet with each class in turn as the positive class."""
    cm = confusion(truth, pred)
    return {0: metrics(cm.swapped()), 1: metrics(cm)}


def accuracy(truth: Any, pred: Any) -> float:
    return metrics(confusion(truth, pred)).accuracy
