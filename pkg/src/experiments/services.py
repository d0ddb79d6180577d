from __future__ import annotations

import logging
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.config.settings import Settings, get_settings
from src.core.errors import ExperimentFailed, FallbenchError, UnknownSubject
from src.domain.classifiers.entities import CLASSIFIER_KINDS, TUNE_K_GRID, TrainConfig
from src.domain.classifiers.services import predict, train
from src.domain.features.services import build_dataset, standardize_apply, standardize_fit
from src.domain.ingest.entities import Catalog, SubjectId, TrialRecord
from src.domain.ingest.services import load_cohort, scan_catalog
from src.evaluation.metrics import accuracy, confusion, per_class_metrics
from src.evaluation.reference import TABLE4, reference_delta_pp
from src.evaluation.runner import CrossValidationResult, cross_validate, select_best
from src.evaluation.splits import train_test_split
from src.experiments.entities import (
    COHORTS,
    EXPERIMENT_IDS,
    Cohort,
    DeltaEntry,
    DeltaReport,
    ExperimentReport,
    ExperimentSpec,
    cohort_of,
    experiment_id_for,
)
from src.utils.caching import load_cohort_cache, save_cohort

LOG = logging.getLogger(__name__)

_DEFAULT_COHORTS: dict[str, list[SubjectId]] = {
    "One": [SubjectId("Adult", 1)],
    "Ten": [SubjectId("Adult", i) for i in range(1, 11)],
}


def cohort_subjects(
    cohort: Cohort,
    catalog: Optional[Catalog] = None,
    override: Optional[Sequence[str]] = None,
) -> list[SubjectId]:
    """Subjects of a cohort in id order: One = SA01, Ten = SA01..SA10, All = all 38.

    ``override`` replaces the convention; with a catalog every subject must
    have trial files in it.
    """
    if override:
        subjects: list[SubjectId] = []
        for text in override:
            try:
                subject = SubjectId.parse(text)
            except ValueError as exc:
                raise UnknownSubject(text, str(exc)) from exc
            if subject not in subjects:
                subjects.append(subject)
        subjects.sort()
    elif cohort == "All":
        subjects = SubjectId.all()
    elif cohort in _DEFAULT_COHORTS:
        subjects = list(_DEFAULT_COHORTS[cohort])
    else:
        raise UnknownSubject(str(cohort), "expected cohort One, Ten or All")

    if catalog is not None:
        present = set(catalog.subjects)
        missing = [str(s) for s in subjects if s not in present]
        if missing:
            raise UnknownSubject(", ".join(missing), f"cohort {cohort} needs trial files under {catalog.root}")
    return subjects


def _load_trials(catalog: Catalog, subjects: list[SubjectId], decimation: int, settings: Settings) -> list[TrialRecord]:
    if settings.cache_enabled:
        cached = load_cohort_cache(settings.cache_dir, catalog.root, subjects, decimation)
        if cached is not None:
            return cached
    trials = load_cohort(catalog, subjects, decimation, workers=settings.parse_workers)
    if settings.cache_enabled:
        save_cohort(settings.cache_dir, catalog.root, subjects, decimation, trials)
    return trials


def _train_configs(spec: ExperimentSpec, settings: Settings) -> list[TrainConfig]:
    cfgs: list[TrainConfig] = []
    for kind in CLASSIFIER_KINDS:
        if kind == "knn" and spec.tune_k:
            cfgs.extend(TrainConfig.from_settings("knn", settings, seed=spec.seed, k=k) for k in TUNE_K_GRID)
        else:
            cfgs.append(TrainConfig.from_settings(kind, settings, seed=spec.seed, k=spec.k))
    return cfgs


def _best_per_kind(results: Sequence[CrossValidationResult]) -> dict[str, CrossValidationResult]:
    """First result with the highest mean per kind; a kind with no completed config keeps its first result."""
    best: dict[str, CrossValidationResult] = {}
    for result in results:
        current = best.get(result.config.kind)
        if current is None:
            best[result.config.kind] = result
            continue
        if result.mean_accuracy is None:
            continue
        if current.mean_accuracy is None or result.mean_accuracy > current.mean_accuracy:
            best[result.config.kind] = result
    return best


def run_experiment(
    spec: ExperimentSpec,
    root: str | Path,
    *,
    settings: Optional[Settings] = None,
    catalog: Optional[Catalog] = None,
    workers: int = 1,
) -> ExperimentReport:
    """Load the cohort, split 80/20, train every method, select by CV, score KNN per class.

    Raises on any ingest or training failure; the message names the experiment.
    """
    settings = settings or get_settings()
    started = time.perf_counter()
    try:
        catalog = catalog or scan_catalog(root)
        subjects = cohort_subjects(spec.cohort, catalog, spec.subjects)
        trials = _load_trials(catalog, subjects, spec.decimation, settings)
        data = build_dataset(trials, spec.mode, calibrated=spec.calibrated)

        plan = train_test_split(
            len(data),
            spec.split_ratio,
            spec.seed,
            strata=data.labels if spec.stratify else None,
            groups=data.groups if spec.split_by_trial else None,
        )
        train_part = data.subset(plan.train)
        test_part = data.subset(plan.test)
        LOG.info(
            "Experiment %d (%s): %d subjects, %d rows -> %d train / %d test (%s split, seed %d)",
            spec.id,
            spec.title,
            len(subjects),
            len(data),
            len(train_part),
            len(test_part),
            spec.split_kind,
            spec.seed,
        )

        cv_started = time.perf_counter()
        results = cross_validate(
            train_part,
            _train_configs(spec, settings),
            spec.folds,
            spec.seed,
            stratify=spec.stratify,
            by_group=spec.split_by_trial,
            standardize=spec.standardize,
            workers=workers,
        )
        best_cfg, best_cv = select_best(results)
        per_kind = _best_per_kind(results)
        knn_k = per_kind["knn"].config.k if spec.tune_k else spec.k
        LOG.info(
            "Experiment %d: CV selected %s at %.4f in %.2fs",
            spec.id,
            best_cfg.label,
            best_cv,
            time.perf_counter() - cv_started,
        )

        fit_train, fit_test = train_part, test_part
        if spec.standardize:
            params = standardize_fit(train_part)
            fit_train = standardize_apply(params, train_part)
            fit_test = standardize_apply(params, test_part)

        test_accuracy: dict[str, Optional[float]] = {}
        knn_pred = np.zeros(0, dtype=np.int64)
        for kind in CLASSIFIER_KINDS:
            cfg = TrainConfig.from_settings(kind, settings, seed=spec.seed, k=knn_k)
            pred = predict(train(fit_train, cfg), fit_test.rows)
            test_accuracy[kind] = accuracy(fit_test.labels, pred)
            if kind == "knn":
                knn_pred = pred
    except FallbenchError as exc:
        raise ExperimentFailed(spec.id, exc) from exc

    report = ExperimentReport(
        spec=spec,
        subjects=tuple(str(s) for s in subjects),
        test_accuracy=test_accuracy,
        knn_k=knn_k,
        cv_accuracy={kind: per_kind[kind].mean_accuracy for kind in CLASSIFIER_KINDS if kind in per_kind},
        selected_kind=best_cfg.kind,
        selected_label=best_cfg.label,
        selected_cv_accuracy=best_cv,
        per_class=per_class_metrics(test_part.labels, knn_pred),
        confusion=confusion(test_part.labels, knn_pred),
        total_rows=len(data),
        train_rows=len(train_part),
        test_rows=len(test_part),
        wall_clock_s=round(time.perf_counter() - started, 3),
    )
    LOG.info(
        "Experiment %d done: KNN test accuracy %.4f, selected %s in %.2fs",
        spec.id,
        report.knn_accuracy,
        report.selected_label,
        report.wall_clock_s,
    )
    return report


def _run_guarded(spec: ExperimentSpec, root: str | Path, settings: Settings, catalog: Catalog, workers: int) -> ExperimentReport:
    started = time.perf_counter()
    try:
        return run_experiment(spec, root, settings=settings, catalog=catalog, workers=workers)
    except FallbenchError as exc:
        LOG.error("Experiment %d failed: %s", spec.id, exc)
        return ExperimentReport.failed(spec, str(exc), wall_clock_s=round(time.perf_counter() - started, 3))


def run_all(
    root: str | Path,
    base_seed: int = 42,
    *,
    experiment_ids: Sequence[int] = EXPERIMENT_IDS,
    flags: Optional[Mapping[str, Any]] = None,
    subject_overrides: Optional[Mapping[str, Sequence[str]]] = None,
    settings: Optional[Settings] = None,
    parallel: bool = False,
    workers: int = 1,
) -> tuple[list[ExperimentReport], DeltaReport]:
    """Run the selected experiments with seeds ``base_seed + id``.

    A failed experiment is reported with status ``failed`` and the rest still
    run. Reports come back in id order whether or not ``parallel`` is set.
    """
    settings = settings or get_settings()
    catalog = scan_catalog(root)
    overrides = subject_overrides or {}
    specs = [
        ExperimentSpec.for_id(
            experiment_id,
            base_seed,
            subjects=_override_for(experiment_id, overrides),
            **dict(flags or {}),
        )
        for experiment_id in sorted(set(experiment_ids))
    ]
    started = time.perf_counter()
    if parallel and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=len(specs), thread_name_prefix="fallbench-exp") as executor:
            reports = list(executor.map(lambda spec: _run_guarded(spec, root, settings, catalog, workers), specs))
    else:
        reports = [_run_guarded(spec, root, settings, catalog, workers) for spec in specs]
    LOG.info(
        "Ran %d experiments (%d failed) in %.2fs",
        len(reports),
        sum(1 for r in reports if not r.ok),
        time.perf_counter() - started,
    )
    return reports, compute_deltas(reports)


def _override_for(experiment_id: int, overrides: Mapping[str, Sequence[str]]) -> Optional[tuple[str, ...]]:
    cohort = cohort_of(experiment_id)
    chosen = overrides.get(cohort) or overrides.get("*")
    return tuple(chosen) if chosen else None


def table4_value(report: Optional[ExperimentReport]) -> Optional[float]:
    """KNN CV-mean accuracy, the quantity compared across cohorts and views."""
    if report is None or not report.ok:
        return None
    return report.knn_cv_accuracy


def compute_deltas(reports: Sequence[ExperimentReport]) -> DeltaReport:
    """KNN drops between cohorts (per step and One to All) and between feature views."""
    by_id = {report.spec.id: report for report in reports}
    entries: list[DeltaEntry] = []
    sources: set[int] = set()

    def value(cohort: str, mode: str) -> Optional[float]:
        return table4_value(by_id.get(experiment_id_for(cohort, mode)))

    def add(decomposition: str, mode: str, left: tuple[str, str], right: tuple[str, str], reference: Optional[float]) -> None:
        minuend, subtrahend = value(*left), value(*right)
        if minuend is None or subtrahend is None:
            return
        sources.update({experiment_id_for(*left), experiment_id_for(*right)})
        entries.append(
            DeltaEntry(
                decomposition=decomposition,  # type: ignore[arg-type]
                mode=mode,
                minuend_label=f"{left[0]}/{left[1]}",
                subtrahend_label=f"{right[0]}/{right[1]}",
                minuend=minuend,
                subtrahend=subtrahend,
                reference_pp=reference,
            )
        )

    for mode in ("raw9", "svm3"):
        for start, end in (("One", "Ten"), ("Ten", "All")):
            add("step", mode, (start, mode), (end, mode), reference_delta_pp("step", mode, start, end))
        add("span", mode, ("One", mode), ("All", mode), reference_delta_pp("span", mode, "One", "All"))
    for cohort in COHORTS:
        published = round((TABLE4["raw9"][cohort] - TABLE4["svm3"][cohort]) * 100, 2)
        add("mode", "raw9-svm3", (cohort, "raw9"), (cohort, "svm3"), published)

    return DeltaReport(entries=tuple(entries), sources=tuple(sorted(sources)))


@dataclass(frozen=True)
class SweepResult:
    """Experiment 1 repeated with each subject as the single-subject cohort."""

    reports: tuple[ExperimentReport, ...] = field(default_factory=tuple)

    @property
    def accuracies(self) -> np.ndarray:
        values = [r.knn_accuracy for r in self.reports if r.ok and r.knn_accuracy is not None]
        return np.array(values, dtype=np.float64)

    def summary(self) -> dict[str, Optional[float]]:
        values = self.accuracies
        if values.size == 0:
            return {"min": None, "median": None, "max": None}
        return {"min": float(values.min()), "median": float(np.median(values)), "max": float(values.max())}


def sweep_single_subjects(
    root: str | Path,
    base_seed: int = 42,
    *,
    flags: Optional[Mapping[str, Any]] = None,
    settings: Optional[Settings] = None,
    parallel: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Bound the single-subject cohort choice by running experiment 1 for every subject present."""
    settings = settings or get_settings()
    catalog = scan_catalog(root)
    specs = [
        ExperimentSpec.for_id(1, base_seed, subjects=(str(subject),), **dict(flags or {}))
        for subject in catalog.subjects
    ]
    if parallel and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=min(len(specs), 8), thread_name_prefix="fallbench-sweep") as executor:
            reports = list(executor.map(lambda spec: _run_guarded(spec, root, settings, catalog, workers), specs))
    else:
        reports = [_run_guarded(spec, root, settings, catalog, workers) for spec in specs]
    result = SweepResult(reports=tuple(reports))
    LOG.info("Single-subject sweep over %d subjects: %s", len(reports), result.summary())
    return result
