import json
from dataclasses import replace

import pytest

from src.config.settings import Settings
from src.core.errors import BadConfig, ExperimentFailed, UnknownSubject
from src.domain.ingest.services import scan_catalog
from src.evaluation.metrics import MetricSet
from src.evaluation.reference import TABLE4
from src.experiments.acceptance import evaluate_acceptance
from src.experiments.entities import (
    ExperimentReport,
    ExperimentSpec,
    cohort_of,
    experiment_id_for,
    experiment_title,
    mode_of,
)
from src.experiments.reporting import (
    EMPTY_CELL,
    format_percent,
    markdown_table,
    render_sweep,
    render_tables,
    table2_frame,
    table3_frame,
    table4_frame,
)
from src.experiments.services import (
    cohort_subjects,
    compute_deltas,
    run_all,
    run_experiment,
    sweep_single_subjects,
)

FIXTURE_SUBJECTS = ("SA01", "SA02", "SE01")
FAST_FLAGS = {"folds": 3}


@pytest.fixture
def settings() -> Settings:
    return Settings(parse_workers=1, cache_enabled=False)


def _fake_report(experiment_id: int, knn_cv: float, **accuracies: float) -> ExperimentReport:
    test_accuracy = {"logreg": 0.5, "lda": 0.5, "knn": knn_cv, "tree": 0.5, "gnb": 0.5}
    test_accuracy.update(accuracies)
    return ExperimentReport(
        spec=ExperimentSpec.for_id(experiment_id, 42),
        test_accuracy=test_accuracy,
        cv_accuracy={"knn": knn_cv},
        knn_k=5,
        selected_kind="knn",
        selected_label="KNN(k=5)",
        selected_cv_accuracy=knn_cv,
    )


def _published_reports() -> list[ExperimentReport]:
    return [
        _fake_report(experiment_id_for(cohort, mode), TABLE4[mode][cohort])
        for mode in ("raw9", "svm3")
        for cohort in ("One", "Ten", "All")
    ]


# --------------------------------------------------------------------------------------
# Experiment ids and cohorts
# --------------------------------------------------------------------------------------


def test_experiment_id_mapping():
    assert [cohort_of(i) for i in range(1, 7)] == ["One", "One", "Ten", "Ten", "All", "All"]
    assert [mode_of(i) for i in range(1, 7)] == ["raw9", "svm3"] * 3
    assert experiment_id_for("All", "raw9") == 5
    assert experiment_title(4) == "10 subjects with SVM"
    with pytest.raises(BadConfig):
        cohort_of(7)


def test_spec_derives_seed_and_checks_consistency():
    spec = ExperimentSpec.for_id(3, 100)
    assert (spec.cohort, spec.mode, spec.seed) == ("Ten", "raw9", 103)
    with pytest.raises(BadConfig):
        ExperimentSpec(id=3, cohort="One", mode="raw9", seed=1)
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec


def test_cohort_subject_conventions():
    assert [str(s) for s in cohort_subjects("One")] == ["SA01"]
    assert [str(s) for s in cohort_subjects("Ten")] == [f"SA{i:02d}" for i in range(1, 11)]
    assert len(cohort_subjects("All")) == 38


def test_cohort_subject_override(fixture_root):
    catalog = scan_catalog(fixture_root)
    subjects = cohort_subjects("Ten", catalog, ["se01", "SA02", "SA02"])
    assert [str(s) for s in subjects] == ["SA02", "SE01"]

    with pytest.raises(UnknownSubject):
        cohort_subjects("Ten", catalog)
    with pytest.raises(UnknownSubject):
        cohort_subjects("One", catalog, ["XX01"])


# --------------------------------------------------------------------------------------
# Running on the fixture tree
# --------------------------------------------------------------------------------------


def test_run_experiment_on_fixture(fixture_root, settings):
    spec = ExperimentSpec.for_id(1, 42, subjects=("SA01",), **FAST_FLAGS)

    report = run_experiment(spec, fixture_root, settings=settings)

    assert report.ok
    assert report.subjects == ("SA01",)
    assert (report.total_rows, report.train_rows, report.test_rows) == (136, 108, 28)
    assert set(report.test_accuracy) == {"logreg", "lda", "knn", "tree", "gnb"}
    assert report.knn_accuracy > 0.95
    assert report.selected_kind in report.test_accuracy
    assert report.confusion.total == 28
    assert set(report.per_class) == {0, 1}


def test_run_experiment_with_tuned_k_and_trial_split(fixture_root, settings):
    spec = ExperimentSpec.for_id(6, 42, subjects=FIXTURE_SUBJECTS, tune_k=True, split_by_trial=True, folds=2)

    report = run_experiment(spec, fixture_root, settings=settings)

    assert report.ok
    assert report.knn_k in (1, 3, 5, 7, 9)
    assert report.spec.split_kind == "trial"
    assert report.total_rows == 408


def test_run_experiment_names_the_failing_experiment(fixture_root, settings):
    spec = ExperimentSpec.for_id(1, 42, subjects=("SA09",))
    with pytest.raises(ExperimentFailed) as info:
        run_experiment(spec, fixture_root, settings=settings)
    assert info.value.experiment_id == 1
    assert info.value.exit_code == 2
    assert "experiment 1" in str(info.value)


def test_run_all_continues_past_a_failed_experiment(fixture_root, settings):
    reports, deltas = run_all(
        fixture_root,
        42,
        experiment_ids=(3, 1),
        flags=FAST_FLAGS,
        subject_overrides={"One": ("SA01",), "Ten": ("SA09",)},
        settings=settings,
    )

    assert [r.spec.id for r in reports] == [1, 3]
    assert [r.status for r in reports] == ["ok", "failed"]
    assert "SA09" in reports[1].error
    assert deltas.entries == ()


def test_run_all_is_deterministic_and_order_independent(fixture_root, settings, tmp_path):
    overrides = {"*": FIXTURE_SUBJECTS}
    serial, serial_deltas = run_all(fixture_root, 7, flags=FAST_FLAGS, subject_overrides=overrides, settings=settings)
    parallel, parallel_deltas = run_all(
        fixture_root, 7, flags=FAST_FLAGS, subject_overrides=overrides, settings=settings, parallel=True, workers=2
    )

    assert [r.spec.seed for r in serial] == [8, 9, 10, 11, 12, 13]
    render_tables(serial, tmp_path / "a", deltas=serial_deltas)
    render_tables(parallel, tmp_path / "b", deltas=parallel_deltas)
    for name in ("table2.csv", "table3.csv", "table4.csv", "deltas.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_uses_cohort_cache_when_enabled(fixture_root, settings, tmp_path):
    cached = replace(settings, cache_enabled=True, cache_dir=str(tmp_path / "cache"))
    spec = ExperimentSpec.for_id(1, 42, subjects=("SA02",), **FAST_FLAGS)

    first = run_experiment(spec, fixture_root, settings=cached)
    second = run_experiment(spec, fixture_root, settings=cached)

    assert len(list((tmp_path / "cache").glob("cohort_*.csv"))) == 1
    assert first.to_dict() | {"wall_clock_s": 0} == second.to_dict() | {"wall_clock_s": 0}


def test_sweep_single_subjects(fixture_root, settings, tmp_path):
    sweep = sweep_single_subjects(fixture_root, 42, flags=FAST_FLAGS, settings=settings)

    assert [r.subjects for r in sweep.reports] == [("SA01",), ("SA02",), ("SE01",)]
    summary = sweep.summary()
    assert summary["min"] <= summary["median"] <= summary["max"]

    lines = render_sweep(sweep, tmp_path).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "subject,status,knn_accuracy,selected"
    assert len(lines) == 1 + 3 + 3


def test_report_dict_round_trip(fixture_root, settings):
    report = run_experiment(ExperimentSpec.for_id(2, 42, subjects=("SE01",), **FAST_FLAGS), fixture_root, settings=settings)
    payload = json.loads(json.dumps(report.to_dict()))
    assert ExperimentReport.from_dict(payload).to_dict() == report.to_dict()


# --------------------------------------------------------------------------------------
# Deltas and tables
# --------------------------------------------------------------------------------------


def test_deltas_reproduce_published_differences():
    deltas = compute_deltas(_published_reports())

    assert len(deltas.entries) == 9
    assert deltas.sources == (1, 2, 3, 4, 5, 6)
    for entry in deltas.entries:
        if entry.reference_pp is not None:
            assert entry.delta * 100 == pytest.approx(entry.reference_pp, abs=1e-9)
    mode_all = [e for e in deltas.by_decomposition("mode") if e.minuend_label == "All/raw9"][0]
    assert mode_all.delta * 100 == pytest.approx(23.48)
    spans = {e.mode: e.delta * 100 for e in deltas.by_decomposition("span")}
    assert spans == pytest.approx({"raw9": 3.23, "svm3": 13.19})


def test_deltas_skip_missing_experiments():
    deltas = compute_deltas([_fake_report(1, 0.9), _fake_report(2, 0.8)])
    assert [(e.decomposition, e.minuend_label, e.subtrahend_label) for e in deltas.entries] == [("mode", "One/raw9", "One/svm3")]


def test_format_percent():
    assert format_percent(0.9653) == "96.53"
    assert format_percent(1.0) == "100.00"
    assert format_percent(0.0) == "0.00"
    assert format_percent(0.140625) == "14.06"
    assert format_percent(None) == EMPTY_CELL


def test_table_shapes():
    reports = _published_reports()
    reports[0] = ExperimentReport.failed(ExperimentSpec.for_id(1, 42), "boom")

    table2 = table2_frame(reports)
    table3 = table3_frame(reports)
    table4 = table4_frame(reports)

    assert list(table2.columns) == ["S.No", "Experiments", "split", "LR", "LDA", "KNN", "DT", "NB", "MODEL selected", "CV accuracy", "status"]
    assert table2["S.No"].tolist() == ["1", "2", "3", "4", "5", "6"]
    assert table2.loc[0, "KNN"] == EMPTY_CELL
    assert table2.loc[4, "KNN"] == "93.30"
    assert table3.shape == (6, 5)
    assert table4.loc[1, "All subjects"] == "69.82"
    assert table4.loc[0, "1 subject"] == EMPTY_CELL
    assert table4.loc[0, "1 subject (reference)"] == "96.53"


def test_markdown_table_pads_columns():
    text = markdown_table(table2_frame(_published_reports()[:1]))
    lines = text.splitlines()
    assert len({len(line) for line in lines}) == 1
    assert lines[0].startswith("| S.No |")


def test_render_tables_writes_every_file(tmp_path):
    reports = _published_reports()
    written = render_tables(reports, tmp_path, deltas=compute_deltas(reports), config={"base_seed": 42})

    assert sorted(p.name for p in written) == sorted(
        ["table2.csv", "table2.md", "table3.csv", "table3.md", "table4.csv", "table4.md", "deltas.csv"]
    )
    markdown = (tmp_path / "table2.md").read_text(encoding="utf-8")
    assert "split: row" in markdown
    assert '"base_seed": 42' in markdown


# --------------------------------------------------------------------------------------
# Acceptance checks
# --------------------------------------------------------------------------------------


def _with_per_class(report: ExperimentReport, fall_recall: float, adl_recall: float) -> ExperimentReport:
    per_class = {
        0: MetricSet(accuracy=0.93, precision=0.94, recall=adl_recall, f1=0.95),
        1: MetricSet(accuracy=0.93, precision=0.92, recall=fall_recall, f1=0.90),
    }
    return ExperimentReport(**{**report.__dict__, "per_class": per_class})


def test_acceptance_on_published_values():
    reports = _published_reports()
    reports[4] = _with_per_class(_fake_report(5, 0.9330, knn=0.9298), fall_recall=0.88, adl_recall=0.96)

    checks = {check.name: check.status for check in evaluate_acceptance(reports)}

    assert checks == {
        "experiment5_knn_accuracy": "pass",
        "knn_beats_other_methods": "pass",
        "magnitude_view_degrades_knn": "pass",
        "knn_non_increasing_over_cohorts": "pass",
        "knn_per_class_recall": "pass",
    }


def test_acceptance_flags_regressions_and_skips_missing():
    reports = [_fake_report(5, 0.70, knn=0.70, tree=0.80), _fake_report(6, 0.75)]

    checks = {check.name: check.status for check in evaluate_acceptance(reports)}

    assert checks["experiment5_knn_accuracy"] == "fail"
    assert checks["knn_beats_other_methods"] == "fail"
    assert checks["magnitude_view_degrades_knn"] == "fail"
    assert checks["knn_non_increasing_over_cohorts"] == "skip"
    assert checks["knn_per_class_recall"] == "skip"


def test_acceptance_ignores_trial_split_runs():
    report = _fake_report(5, 0.93)
    trial_split = ExperimentReport(**{**report.__dict__, "spec": ExperimentSpec.for_id(5, 42, split_by_trial=True)})
    checks = evaluate_acceptance([trial_split])
    assert {check.status for check in checks} == {"skip"}
