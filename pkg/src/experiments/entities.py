from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Literal, Optional

from src.core.errors import BadConfig
from src.domain.classifiers.entities import CLASSIFIER_KINDS
from src.domain.features.entities import FeatureMode
from src.evaluation.metrics import ConfusionMatrix, MetricSet

Cohort = Literal["One", "Ten", "All"]
SplitKind = Literal["row", "trial"]
ReportStatus = Literal["ok", "failed"]

COHORTS: tuple[Cohort, ...] = ("One", "Ten", "All")
COHORT_LABELS: dict[str, str] = {"One": "1 subject", "Ten": "10 subjects", "All": "All subjects"}
EXPERIMENT_IDS: tuple[int, ...] = (1, 2, 3, 4, 5, 6)


def cohort_of(experiment_id: int) -> Cohort:
    _check_id(experiment_id)
    return COHORTS[(experiment_id - 1) // 2]


def mode_of(experiment_id: int) -> FeatureMode:
    _check_id(experiment_id)
    return "raw9" if experiment_id % 2 == 1 else "svm3"


def experiment_id_for(cohort: str, mode: str) -> int:
    return COHORTS.index(cohort) * 2 + (1 if mode == "raw9" else 2)  # type: ignore[arg-type]


def experiment_title(experiment_id: int) -> str:
    title = COHORT_LABELS[cohort_of(experiment_id)]
    return f"{title} with SVM" if mode_of(experiment_id) == "svm3" else title


def _check_id(experiment_id: int) -> None:
    if experiment_id not in EXPERIMENT_IDS:
        raise BadConfig(f"experiment id must be one of 1..6, got {experiment_id}")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to rerun one experiment bit-identically."""

    id: int
    cohort: Cohort
    mode: FeatureMode
    seed: int
    decimation: int = 1
    calibrated: bool = True
    standardize: bool = False
    tune_k: bool = False
    stratify: bool = True
    split_by_trial: bool = False
    folds: int = 10
    split_ratio: float = 0.8
    k: int = 5
    subjects: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        _check_id(self.id)
        if self.cohort != cohort_of(self.id) or self.mode != mode_of(self.id):
            raise BadConfig(
                f"experiment {self.id} is ({cohort_of(self.id)}, {mode_of(self.id)}), got ({self.cohort}, {self.mode})"
            )
        if self.decimation < 1:
            raise BadConfig(f"decimation must be >= 1, got {self.decimation}")

    @classmethod
    def for_id(cls, experiment_id: int, base_seed: int, **flags: Any) -> ExperimentSpec:
        """Spec with the derived seed ``base_seed + id``."""
        return cls(
            id=experiment_id,
            cohort=cohort_of(experiment_id),
            mode=mode_of(experiment_id),
            seed=base_seed + experiment_id,
            **flags,
        )

    @property
    def split_kind(self) -> SplitKind:
        return "trial" if self.split_by_trial else "row"

    @property
    def title(self) -> str:
        return experiment_title(self.id)

    def to_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["subjects"] = None if self.subjects is None else list(self.subjects)
        return payload

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> ExperimentSpec:
        values = dict(payload)
        if values.get("subjects") is not None:
            values["subjects"] = tuple(values["subjects"])
        try:
            return cls(**values)
        except TypeError as exc:
            raise BadConfig(f"invalid experiment spec: {exc}") from exc


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    status: ReportStatus = "ok"
    error: Optional[str] = None
    subjects: tuple[str, ...] = field(default_factory=tuple)
    test_accuracy: dict[str, Optional[float]] = field(default_factory=dict)
    knn_k: Optional[int] = None
    cv_accuracy: dict[str, Optional[float]] = field(default_factory=dict)
    selected_kind: Optional[str] = None
    selected_label: Optional[str] = None
    selected_cv_accuracy: Optional[float] = None
    per_class: dict[int, MetricSet] = field(default_factory=dict)
    confusion: Optional[ConfusionMatrix] = None
    total_rows: int = 0
    train_rows: int = 0
    test_rows: int = 0
    wall_clock_s: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def knn_accuracy(self) -> Optional[float]:
        return self.test_accuracy.get("knn")

    @property
    def knn_cv_accuracy(self) -> Optional[float]:
        return self.cv_accuracy.get("knn")

    @classmethod
    def failed(cls, spec: ExperimentSpec, error: str, wall_clock_s: float = 0.0) -> ExperimentReport:
        return cls(spec=spec, status="failed", error=error, wall_clock_s=wall_clock_s)

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "status": self.status,
            "error": self.error,
            "subjects": list(self.subjects),
            "test_accuracy": {kind: self.test_accuracy.get(kind) for kind in CLASSIFIER_KINDS if kind in self.test_accuracy},
            "knn_k": self.knn_k,
            "cv_accuracy": {kind: self.cv_accuracy.get(kind) for kind in CLASSIFIER_KINDS if kind in self.cv_accuracy},
            "selected_kind": self.selected_kind,
            "selected_label": self.selected_label,
            "selected_cv_accuracy": self.selected_cv_accuracy,
            "per_class": {str(label): metric.to_dict() for label, metric in sorted(self.per_class.items())},
            "confusion": None if self.confusion is None else self.confusion.to_dict(),
            "total_rows": self.total_rows,
            "train_rows": self.train_rows,
            "test_rows": self.test_rows,
            "wall_clock_s": self.wall_clock_s,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> ExperimentReport:
        per_class = {
            int(label): MetricSet(
                accuracy=float(item["accuracy"]),
                precision=float(item["precision"]),
                recall=float(item["recall"]),
                f1=float(item["f1"]),
                undefined=tuple(item.get("undefined") or ()),
            )
            for label, item in (payload.get("per_class") or {}).items()
        }
        cm = payload.get("confusion")
        return cls(
            spec=ExperimentSpec.from_dict(payload["spec"]),
            status=payload.get("status", "ok"),
            error=payload.get("error"),
            subjects=tuple(payload.get("subjects") or ()),
            test_accuracy=dict(payload.get("test_accuracy") or {}),
            knn_k=payload.get("knn_k"),
            cv_accuracy=dict(payload.get("cv_accuracy") or {}),
            selected_kind=payload.get("selected_kind"),
            selected_label=payload.get("selected_label"),
            selected_cv_accuracy=payload.get("selected_cv_accuracy"),
            per_class=per_class,
            confusion=None if cm is None else ConfusionMatrix(**cm),
            total_rows=int(payload.get("total_rows", 0)),
            train_rows=int(payload.get("train_rows", 0)),
            test_rows=int(payload.get("test_rows", 0)),
            wall_clock_s=float(payload.get("wall_clock_s", 0.0)),
        )


@dataclass(frozen=True)
class DeltaEntry:
    """One KNN accuracy drop: ``minuend - subtrahend``, both taken from reports."""

    decomposition: Literal["step", "span", "mode"]
    mode: str
    minuend_label: str
    subtrahend_label: str
    minuend: float
    subtrahend: float
    reference_pp: Optional[float] = None

    @property
    def delta(self) -> float:
        return self.minuend - self.subtrahend

    def to_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["delta"] = self.delta
        return payload


@dataclass(frozen=True)
class DeltaReport:
    entries: tuple[DeltaEntry, ...] = field(default_factory=tuple)
    # Experiment ids whose values fed the deltas.
    sources: tuple[int, ...] = field(default_factory=tuple)

    def by_decomposition(self, decomposition: str) -> list[DeltaEntry]:
        return [entry for entry in self.entries if entry.decomposition == decomposition]

    def to_dict(self) -> dict[str, Any]:
        return {"entries": [entry.to_dict() for entry in self.entries], "sources": list(self.sources)}
