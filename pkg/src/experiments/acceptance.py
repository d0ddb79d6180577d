"""Reproduction checks evaluated against a finished run's reports."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

from src.evaluation.reference import (
    ADL_RECALL_TARGET,
    ADL_RECALL_TOLERANCE,
    ALL_COHORT_MODE_GAP_MIN,
    EXPERIMENT5_KNN_MIN,
    EXPERIMENT5_KNN_TOLERANCE,
    FALL_RECALL_TARGET,
    FALL_RECALL_TOLERANCE,
    TABLE2,
)
from src.experiments.entities import COHORTS, ExperimentReport, experiment_id_for
from src.experiments.services import table4_value


@dataclass(frozen=True)
class AcceptanceCheck:
    name: str
    # None means the reports needed for the check are missing or failed.
    passed: Optional[bool]
    detail: str

    @property
    def status(self) -> str:
        return "skip" if self.passed is None else ("pass" if self.passed else "fail")

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def _ok(by_id: dict[int, ExperimentReport], *ids: int) -> bool:
    return all(i in by_id and by_id[i].ok for i in ids)


def check_experiment5_knn(by_id: dict[int, ExperimentReport]) -> AcceptanceCheck:
    name = "experiment5_knn_accuracy"
    if not _ok(by_id, 5) or by_id[5].knn_accuracy is None:
        return AcceptanceCheck(name, None, "experiment 5 not available")
    value = by_id[5].knn_accuracy
    target = TABLE2[5]["knn"]
    passed = value >= EXPERIMENT5_KNN_MIN and abs(value - target) <= EXPERIMENT5_KNN_TOLERANCE
    return AcceptanceCheck(name, passed, f"KNN {value:.4f} vs published {target:.4f} (+/- {EXPERIMENT5_KNN_TOLERANCE})")


def check_directional_ordering(by_id: dict[int, ExperimentReport]) -> AcceptanceCheck:
    name = "knn_beats_other_methods"
    ids = [i for i in (3, 4, 5, 6) if _ok(by_id, i)]
    if not ids:
        return AcceptanceCheck(name, None, "experiments 3-6 not available")
    losers: list[str] = []
    for experiment_id in ids:
        scores = by_id[experiment_id].test_accuracy
        knn = scores.get("knn")
        for kind, value in scores.items():
            if kind != "knn" and value is not None and knn is not None and value > knn:
                losers.append(f"exp{experiment_id}:{kind} {value:.4f} > knn {knn:.4f}")
    detail = "; ".join(losers) if losers else f"KNN highest in experiments {', '.join(map(str, ids))}"
    return AcceptanceCheck(name, not losers, detail)


def check_mode_degradation(by_id: dict[int, ExperimentReport]) -> AcceptanceCheck:
    name = "magnitude_view_degrades_knn"
    compared: list[str] = []
    failures: list[str] = []
    for cohort in COHORTS:
        raw = table4_value(by_id.get(experiment_id_for(cohort, "raw9")))
        svm = table4_value(by_id.get(experiment_id_for(cohort, "svm3")))
        if raw is None or svm is None:
            continue
        compared.append(cohort)
        if not svm < raw:
            failures.append(f"{cohort}: svm3 {svm:.4f} >= raw9 {raw:.4f}")
        elif cohort == "All" and raw - svm < ALL_COHORT_MODE_GAP_MIN:
            failures.append(f"All: gap {raw - svm:.4f} < {ALL_COHORT_MODE_GAP_MIN}")
    if not compared:
        return AcceptanceCheck(name, None, "no cohort has both views")
    return AcceptanceCheck(name, not failures, "; ".join(failures) or f"checked {', '.join(compared)}")


def check_cohort_degradation(by_id: dict[int, ExperimentReport]) -> AcceptanceCheck:
    name = "knn_non_increasing_over_cohorts"
    values = [(cohort, table4_value(by_id.get(experiment_id_for(cohort, "raw9")))) for cohort in COHORTS]
    present = [(cohort, value) for cohort, value in values if value is not None]
    if len(present) < 2:
        return AcceptanceCheck(name, None, "fewer than two raw9 cohorts available")
    failures = [
        f"{a}->{b}: {va:.4f} -> {vb:.4f}"
        for (a, va), (b, vb) in zip(present, present[1:])
        if vb > va
    ]
    return AcceptanceCheck(name, not failures, "; ".join(failures) or " -> ".join(f"{c} {v:.4f}" for c, v in present))


def check_per_class(by_id: dict[int, ExperimentReport]) -> AcceptanceCheck:
    name = "knn_per_class_recall"
    if not _ok(by_id, 5) or set(by_id[5].per_class) != {0, 1}:
        return AcceptanceCheck(name, None, "experiment 5 not available")
    fall = by_id[5].per_class[1].recall
    adl = by_id[5].per_class[0].recall
    passed = abs(fall - FALL_RECALL_TARGET) <= FALL_RECALL_TOLERANCE and abs(adl - ADL_RECALL_TARGET) <= ADL_RECALL_TOLERANCE
    return AcceptanceCheck(name, passed, f"Fall recall {fall:.4f}, ADL recall {adl:.4f}")


def evaluate_acceptance(reports: Sequence[ExperimentReport]) -> list[AcceptanceCheck]:
    """Row-split runs only; trial-split numbers are not comparable with the published ones."""
    by_id = {r.spec.id: r for r in reports if not r.spec.split_by_trial}
    return [
        check_experiment5_knn(by_id),
        check_directional_ordering(by_id),
        check_mode_degradation(by_id),
        check_cohort_degradation(by_id),
        check_per_class(by_id),
    ]
