from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.core.errors import FallbenchError
from src.domain.classifiers.entities import CLASSIFIER_KINDS, TrainConfig
from src.domain.classifiers.services import predict, train
from src.domain.features.entities import LabeledDataset
from src.domain.features.services import standardize_apply, standardize_fit
from src.evaluation.metrics import accuracy
from src.evaluation.splits import FoldPlan, k_fold

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossValidationResult:
    config: TrainConfig
    fold_accuracies: tuple[float, ...] = field(default_factory=tuple)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def mean_accuracy(self) -> float | None:
        if not self.ok or not self.fold_accuracies:
            return None
        # Fixed fold order keeps the floating sum reproducible.
        return float(np.mean(np.array(self.fold_accuracies, dtype=np.float64)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.label,
            "kind": self.config.kind,
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean_accuracy,
            "error": self.error,
        }


def _evaluate_fold(data: LabeledDataset, plan: FoldPlan, fold: int, cfg: TrainConfig, standardize: bool) -> float:
    train_part = data.subset(plan.train_indices(fold))
    test_part = data.subset(plan.test_indices(fold))
    if standardize:
        params = standardize_fit(train_part)
        train_part = standardize_apply(params, train_part)
        test_part = standardize_apply(params, test_part)
    model = train(train_part, cfg)
    return accuracy(test_part.labels, predict(model, test_part.rows))


def _run_config(data: LabeledDataset, plan: FoldPlan, cfg: TrainConfig, standardize: bool) -> CrossValidationResult:
    started = time.perf_counter()
    scores: list[float] = []
    for fold in range(plan.k):
        try:
            scores.append(_evaluate_fold(data, plan, fold, cfg, standardize))
        except FallbenchError as exc:
            LOG.warning("Cross-validation of %s aborted on fold %d: %s", cfg.label, fold + 1, exc)
            return CrossValidationResult(config=cfg, fold_accuracies=tuple(scores), error=f"fold {fold + 1}: {exc}")
    result = CrossValidationResult(config=cfg, fold_accuracies=tuple(scores))
    LOG.info("CV %s: mean accuracy %.4f over %d folds in %.2fs", cfg.label, result.mean_accuracy, plan.k, time.perf_counter() - started)
    return result


def cross_validate(
    data: LabeledDataset,
    cfgs: Sequence[TrainConfig],
    k: int,
    seed: int,
    *,
    stratify: bool = True,
    by_group: bool = False,
    standardize: bool = False,
    workers: int = 1,
) -> list[CrossValidationResult]:
    """Mean held-out accuracy per config over one shared K-fold plan.

    A config whose training fails on any fold is reported with ``error`` set
    and no mean; the remaining configs still run.
    """
    if not cfgs:
        raise ValueError("cross_validate needs at least one config")
    plan = k_fold(
        len(data),
        k,
        seed,
        strata=data.labels if stratify else None,
        groups=data.groups if by_group else None,
    )
    if workers > 1 and len(cfgs) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(cfgs)), thread_name_prefix="fallbench-cv") as executor:
            return list(executor.map(lambda cfg: _run_config(data, plan, cfg, standardize), cfgs))
    return [_run_config(data, plan, cfg, standardize) for cfg in cfgs]


def select_best(results: Sequence[CrossValidationResult]) -> tuple[TrainConfig, float]:
    """Highest mean accuracy; ties go to the earlier kind in LR < LDA < KNN < DT < NB."""
    ranked = [
        (result.mean_accuracy, -CLASSIFIER_KINDS.index(result.config.kind), -position, result.config)
        for position, result in enumerate(results)
        if result.mean_accuracy is not None
    ]
    if not ranked:
        raise FallbenchError("no configuration completed cross-validation")
    best = max(ranked, key=lambda item: item[:3])
    return best[3], float(best[0])
