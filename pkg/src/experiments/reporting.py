from __future__ import annotations

import json
import logging
import time
from collections.abc import Mapping, Sequence
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from src.domain.classifiers.entities import CLASSIFIER_KINDS, DISPLAY_NAMES
from src.evaluation.reference import TABLE4
from src.experiments.entities import COHORT_LABELS, COHORTS, DeltaReport, ExperimentReport, experiment_id_for, experiment_title
from src.experiments.services import SweepResult, table4_value

LOG = logging.getLogger(__name__)

EMPTY_CELL = "—"
_CLASS_NAMES = {0: "ADLs=0", 1: "Falls=1"}
_METRIC_NAMES = (("precision", "Precision"), ("recall", "Recall"), ("f1", "F1-Score"))
_VIEW_ROWS = (("raw9", "KNN (without magnitude)"), ("svm3", "KNN (with magnitude)"))


def format_percent(value: Optional[float]) -> str:
    """Fraction as a percentage rounded half-up to 2 decimals; None renders as an em dash."""
    if value is None:
        return EMPTY_CELL
    # Decimal(float) is exact, so the rounding sees the stored binary value.
    return str((Decimal(value) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _by_id(reports: Sequence[ExperimentReport]) -> dict[int, ExperimentReport]:
    return {report.spec.id: report for report in reports}


def table2_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    rows: list[dict[str, str]] = []
    for report in sorted(reports, key=lambda r: r.spec.id):
        row = {"S.No": str(report.spec.id), "Experiments": experiment_title(report.spec.id), "split": report.spec.split_kind}
        for kind in CLASSIFIER_KINDS:
            row[DISPLAY_NAMES[kind]] = format_percent(report.test_accuracy.get(kind) if report.ok else None)
        row["MODEL selected"] = (report.selected_label or EMPTY_CELL) if report.ok else EMPTY_CELL
        row["CV accuracy"] = format_percent(report.selected_cv_accuracy if report.ok else None)
        row["status"] = report.status
        rows.append(row)
    return pd.DataFrame(rows, columns=["S.No", "Experiments", "split", *(DISPLAY_NAMES[k] for k in CLASSIFIER_KINDS), "MODEL selected", "CV accuracy", "status"])


def table3_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    """KNN per-class metrics on the raw 9-channel view, one column per cohort."""
    by_id = _by_id(reports)
    rows: list[dict[str, str]] = []
    for label, class_name in _CLASS_NAMES.items():
        for field_name, metric_name in _METRIC_NAMES:
            row = {"class": class_name, "metric": metric_name}
            for cohort in COHORTS:
                report = by_id.get(experiment_id_for(cohort, "raw9"))
                metric = report.per_class.get(label) if report is not None and report.ok else None
                row[COHORT_LABELS[cohort]] = format_percent(None if metric is None else getattr(metric, field_name))
            rows.append(row)
    return pd.DataFrame(rows, columns=["class", "metric", *(COHORT_LABELS[c] for c in COHORTS)])


def table4_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    """KNN with and without the magnitude view per cohort, next to the published figures."""
    by_id = _by_id(reports)
    rows: list[dict[str, str]] = []
    for mode, title in _VIEW_ROWS:
        row = {"method": title}
        for cohort in COHORTS:
            row[COHORT_LABELS[cohort]] = format_percent(table4_value(by_id.get(experiment_id_for(cohort, mode))))
        for cohort in COHORTS:
            row[f"{COHORT_LABELS[cohort]} (reference)"] = format_percent(TABLE4[mode][cohort])
        rows.append(row)
    columns = ["method", *(COHORT_LABELS[c] for c in COHORTS), *(f"{COHORT_LABELS[c]} (reference)" for c in COHORTS)]
    return pd.DataFrame(rows, columns=columns)


def deltas_frame(deltas: DeltaReport) -> pd.DataFrame:
    rows = [
        {
            "decomposition": entry.decomposition,
            "mode": entry.mode,
            "from": entry.minuend_label,
            "to": entry.subtrahend_label,
            "minuend": format_percent(entry.minuend),
            "subtrahend": format_percent(entry.subtrahend),
            "delta_pp": format_percent(entry.delta),
            "reference_pp": EMPTY_CELL if entry.reference_pp is None else f"{entry.reference_pp:.2f}",
        }
        for entry in deltas.entries
    ]
    return pd.DataFrame(rows, columns=["decomposition", "mode", "from", "to", "minuend", "subtrahend", "delta_pp", "reference_pp"])


def sweep_frame(sweep: SweepResult) -> pd.DataFrame:
    rows = [
        {
            "subject": ",".join(report.subjects or report.spec.subjects or ()),
            "status": report.status,
            "knn_accuracy": format_percent(report.knn_accuracy if report.ok else None),
            "selected": (report.selected_label or EMPTY_CELL) if report.ok else EMPTY_CELL,
        }
        for report in sweep.reports
    ]
    for name, value in sweep.summary().items():
        rows.append({"subject": name, "status": "summary", "knn_accuracy": format_percent(value), "selected": EMPTY_CELL})
    return pd.DataFrame(rows, columns=["subject", "status", "knn_accuracy", "selected"])


def markdown_table(frame: pd.DataFrame) -> str:
    """Pipe table with every column padded to its widest cell."""
    header = [str(c) for c in frame.columns]
    body = [[str(v) for v in row] for row in frame.itertuples(index=False)]
    widths = [max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i]) for i in range(len(header))]

    def line(cells: Sequence[str]) -> str:
        return "| " + " | ".join(cell.ljust(width) for cell, width in zip(cells, widths)) + " |"

    return "\n".join([line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|", *(line(row) for row in body)]) + "\n"


def _config_block(config: Optional[Mapping[str, Any]]) -> str:
    if not config:
        return ""
    return "\n## Configuration\n\n```json\n" + json.dumps(config, indent=2, sort_keys=True) + "\n```\n"


def _write_table(out_dir: Path, name: str, title: str, frame: pd.DataFrame, config: Optional[Mapping[str, Any]], split: str) -> list[Path]:
    csv_path = out_dir / f"{name}.csv"
    md_path = out_dir / f"{name}.md"
    frame.to_csv(csv_path, index=False, lineterminator="\n")
    md_path.write_text(f"# {title}\n\nsplit: {split}\n\n" + markdown_table(frame) + _config_block(config), encoding="utf-8")
    return [csv_path, md_path]


def render_tables(
    reports: Sequence[ExperimentReport],
    out_dir: str | Path,
    *,
    deltas: Optional[DeltaReport] = None,
    config: Optional[Mapping[str, Any]] = None,
) -> list[Path]:
    """Write table2/3/4 as CSV and Markdown plus deltas.csv; CSV bytes depend only on the reports."""
    if not reports:
        raise ValueError("render_tables needs at least one report")
    started = time.perf_counter()
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    split = "trial" if any(r.spec.split_by_trial for r in reports) else "row"

    written: list[Path] = []
    written += _write_table(target, "table2", "Accuracy per method and experiment", table2_frame(reports), config, split)
    written += _write_table(target, "table3", "KNN precision, recall and F1 per class", table3_frame(reports), config, split)
    written += _write_table(target, "table4", "KNN with and without magnitude features", table4_frame(reports), config, split)
    if deltas is not None:
        path = target / "deltas.csv"
        deltas_frame(deltas).to_csv(path, index=False, lineterminator="\n")
        written.append(path)
    LOG.info("Rendered %d report files into %s in %.2fs", len(written), target, time.perf_counter() - started)
    return written


def render_sweep(sweep: SweepResult, out_dir: str | Path) -> Path:
    path = Path(out_dir) / "sweep.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(sweep).to_csv(path, index=False, lineterminator="\n")
    return path
