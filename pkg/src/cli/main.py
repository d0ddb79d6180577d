"""fallbench command line: verify, ingest, run, train, predict, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

import numpy as np
import pandas as pd

from src.cli.config import (
    RunConfig,
    build_run_config,
    defaults_from_settings,
    load_config_file,
    parse_experiment_ids,
    parse_subject_overrides,
)
from src.config.settings import Settings, get_settings
from src.core.errors import DataError, FallbenchError, UsageError, exit_code_for
from src.domain.classifiers.entities import TrainConfig, parse_kind
from src.domain.classifiers.serialization import load_model, save_model
from src.domain.classifiers.services import predict, predict_proba, train
from src.domain.features.entities import parse_feature_mode
from src.domain.features.services import build_dataset
from src.domain.ingest.activities import describe_activity
from src.domain.ingest.entities import CatalogEntry
from src.domain.ingest.services import load_cohort, parse_trial, scan_catalog
from src.evaluation.metrics import accuracy
from src.experiments.acceptance import evaluate_acceptance
from src.experiments.entities import ExperimentReport
from src.experiments.reporting import markdown_table, render_sweep, render_tables, table2_frame, table4_frame
from src.experiments.services import cohort_subjects, compute_deltas, run_all, sweep_single_subjects
from src.utils.caching import load_dataset, save_cohort, save_dataset
from src.utils.run_logging import attach_run_log, configure_console, detach_run_log

LOG = logging.getLogger(__name__)

REPORTS_FILE = "reports.json"
CONFIG_FILE = "config.json"


class _UsageFailure(Exception):
    """argparse rejected the command line; the synopsis is already on stderr."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageFailure(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fallbench", description="SisFall fall-detection benchmark.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    verify = sub.add_parser("verify", help="Check a SisFall tree and print file and row counts.")
    verify.add_argument("root", nargs="?", help="Dataset root. Defaults to FALLBENCH_ROOT.")
    verify.add_argument("--activities", action="store_true", help="Also list every activity with its description.")

    ingest = sub.add_parser("ingest", help="Parse a cohort and write a f1..fd,label dataset dump.")
    ingest.add_argument("--root", help="Dataset root. Defaults to FALLBENCH_ROOT.")
    ingest.add_argument("--cohort", default="One", choices=["One", "Ten", "All"])
    ingest.add_argument("--subjects", help="Comma-separated subject ids replacing the cohort convention.")
    ingest.add_argument("--mode", default="raw9", help="raw9 or svm3.")
    ingest.add_argument("--decimation", type=int)
    ingest.add_argument("--raw-counts", action="store_true", help="Keep ADC counts instead of physical units.")
    ingest.add_argument("--out", required=True, help="Dataset CSV to write.")
    ingest.add_argument("--cache", action="store_true", help="Also store the parsed cohort in the CSV cache.")

    run = sub.add_parser("run", help="Run experiments 1..6 and write report tables.")
    run.add_argument("--root", help="Dataset root. Defaults to FALLBENCH_ROOT.")
    run.add_argument("--experiments", nargs="+", help="Experiment ids: 5, 1,3,5 or 1..6.")
    run.add_argument("--decimation", type=int)
    run.add_argument("--raw-counts", action="store_true", help="Use ADC counts instead of physical units.")
    run.add_argument("--standardize", action="store_true", help="z-score features using training statistics.")
    run.add_argument("--tune-k", action="store_true", help="Choose KNN k from 1,3,5,7,9 by cross-validation.")
    run.add_argument("--k", type=int, help="KNN neighbour count (odd).")
    run.add_argument("--no-stratify", action="store_true", help="Shuffle splits without class stratification.")
    run.add_argument("--split-by-trial", action="store_true", help="Keep every trial wholly in train or test.")
    run.add_argument("--folds", type=int, help="Cross-validation folds (default 10).")
    run.add_argument("--split-ratio", type=float, help="Training share of the train/test split (default 0.8).")
    run.add_argument("--seed", type=int, help="Base seed; experiment i uses seed + i.")
    run.add_argument("--subjects", action="append", help="SA01,SA02 for every cohort or ten=SA01,... for one cohort.")
    run.add_argument("--sweep-single-subjects", action="store_true", help="Run experiment 1 once per subject.")
    run.add_argument("--parallel", action="store_true", help="Run experiments concurrently.")
    run.add_argument("--workers", type=int, default=1, help="Threads for cross-validation configs.")
    run.add_argument("--out", help="Output directory (default out).")
    run.add_argument("--run-id", help="Run directory name under --out.")
    run.add_argument("--config", help="Replay a config.json; flags override its values.")

    train_cmd = sub.add_parser("train", help="Train one classifier on a f1..fd,label CSV.")
    train_cmd.add_argument("--kind", required=True, help="logreg, lda, knn, tree or gnb.")
    train_cmd.add_argument("--in", dest="input", required=True)
    train_cmd.add_argument("--model", required=True, help="Model file to write.")
    train_cmd.add_argument("--k", type=int)
    train_cmd.add_argument("--seed", type=int)

    predict_cmd = sub.add_parser("predict", help="Score rows of a f1..fd[,label] CSV with a saved model.")
    predict_cmd.add_argument("--model", required=True)
    predict_cmd.add_argument("--in", dest="input", required=True)
    predict_cmd.add_argument("--out", help="Prediction CSV; defaults to standard output.")

    report = sub.add_parser("report", help="Re-render tables and evaluate acceptance checks for a run.")
    report.add_argument("--from", dest="run_dir", required=True, help="Run directory, e.g. out/<run_id>.")
    report.add_argument("--strict", action="store_true", help="Exit 2 when an acceptance check fails.")
    return parser


# --------------------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    root = args.root or settings.dataset_root
    catalog = scan_catalog(root)
    errors: list[str] = []
    rows = 0

    def _rows(entry: CatalogEntry) -> tuple[int, Optional[str]]:
        try:
            return len(parse_trial(entry.source_path, entry.key)), None
        except DataError as exc:
            return 0, str(exc)

    with ThreadPoolExecutor(max_workers=settings.parse_workers, thread_name_prefix="fallbench-verify") as executor:
        for count, error in executor.map(_rows, catalog.entries):
            rows += count
            if error:
                errors.append(error)

    print(f"{len(catalog)} files", file=out)
    print(f"{rows} rows", file=out)
    print(f"{len(catalog.subjects)} subjects", file=out)
    print("by subject: " + " ".join(f"{s}={n}" for s, n in catalog.counts_by_subject().items()), file=out)
    print("by activity: " + " ".join(f"{a}={n}" for a, n in catalog.counts_by_activity().items()), file=out)
    if args.activities:
        for code, count in catalog.counts_by_activity().items():
            print(f"  {code} ({count} files): {describe_activity(code)}", file=out)
    print(f"{len(catalog.skipped)} skipped", file=out)
    for item in catalog.skipped:
        print(f"  [SKIP] {item.path}: {item.reason}", file=out)
    for error in errors:
        print(f"[ERROR] {error}", file=sys.stderr)
    status = "OK" if not errors else "FAIL"
    print(f"[{status}] {len(catalog) - len(errors)} of {len(catalog)} files parsed", file=out)
    return 0 if not errors else 2


# --------------------------------------------------------------------------------------
# ingest
# --------------------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    catalog = scan_catalog(args.root or settings.dataset_root)
    override = [s for s in (args.subjects or "").split(",") if s.strip()]
    subjects = cohort_subjects(args.cohort, catalog, override or None)
    decimation = args.decimation or settings.decimation
    try:
        mode = parse_feature_mode(args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trials = load_cohort(catalog, subjects, decimation, workers=settings.parse_workers)
    if args.cache:
        save_cohort(settings.cache_dir, catalog.root, subjects, decimation, trials)
    data = build_dataset(trials, mode, calibrated=not args.raw_counts)
    path = save_dataset(args.out, data)
    print(f"wrote {len(data)} rows x {data.width} features to {path}", file=out)
    return 0


# --------------------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------------------


def _run_flag_values(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "root": args.root,
        "experiments": parse_experiment_ids(args.experiments) if args.experiments else None,
        "base_seed": args.seed,
        "decimation": args.decimation,
        "calibrated": False if args.raw_counts else None,
        "standardize": True if args.standardize else None,
        "tune_k": True if args.tune_k else None,
        "k": args.k,
        "stratify": False if args.no_stratify else None,
        "split_by_trial": True if args.split_by_trial else None,
        "folds": args.folds,
        "split_ratio": args.split_ratio,
        "subjects": parse_subject_overrides(args.subjects) if args.subjects else None,
        "sweep_single_subjects": True if args.sweep_single_subjects else None,
        "parallel": True if args.parallel else None,
        "out_dir": args.out,
    }


def resolve_run_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    file_values = load_config_file(args.config) if args.config else {}
    return build_run_config(defaults_from_settings(settings), file_values, _run_flag_values(args))


def _default_run_id(config: RunConfig) -> str:
    return f"run-{time.strftime('%Y%m%d-%H%M%S')}-s{config.base_seed}"


def write_json(path: Path, payload: Any) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def cmd_run(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    config = resolve_run_config(args, settings)
    run_settings = replace(settings, **config.settings_overrides())
    run_dir = Path(config.out_dir) / (args.run_id or _default_run_id(config))
    run_dir.mkdir(parents=True, exist_ok=True)
    config_payload = {**config.to_dict(), "run_id": run_dir.name}
    write_json(run_dir / CONFIG_FILE, config_payload)

    handler = attach_run_log(run_dir, settings.log_level)
    try:
        LOG.info("Run %s: experiments %s, base seed %d, root %s", run_dir.name, list(config.experiments), config.base_seed, config.root)
        if config.sweep_single_subjects:
            sweep = sweep_single_subjects(
                config.root,
                config.base_seed,
                flags=config.experiment_flags(),
                settings=run_settings,
                parallel=config.parallel,
                workers=max(1, args.workers),
            )
            reports = list(sweep.reports)
            render_sweep(sweep, run_dir)
            summary = sweep.summary()
            print(f"sweep over {len(reports)} subjects: " + ", ".join(f"{k}={v}" for k, v in summary.items()), file=out)
        else:
            reports, deltas = run_all(
                config.root,
                config.base_seed,
                experiment_ids=config.experiments,
                flags=config.experiment_flags(),
                subject_overrides=config.subjects,
                settings=run_settings,
                parallel=config.parallel,
                workers=max(1, args.workers),
            )
            render_tables(reports, run_dir, deltas=deltas, config=config_payload)
            print(markdown_table(table2_frame(reports)), file=out, end="")
        write_json(run_dir / REPORTS_FILE, [report.to_dict() for report in reports])
    finally:
        detach_run_log(handler)

    failed = [r for r in reports if not r.ok]
    for report in failed:
        print(f"[FAIL] experiment {report.spec.id}: {report.error}", file=sys.stderr)
    print(f"results in {run_dir}", file=out)
    return 2 if failed else 0


# --------------------------------------------------------------------------------------
# train / predict
# --------------------------------------------------------------------------------------


def cmd_train(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    data = load_dataset(args.input)
    cfg = TrainConfig.from_settings(parse_kind(args.kind), settings, seed=args.seed, k=args.k)
    model = train(data, cfg)
    path = save_model(model, args.model)
    fit = accuracy(data.labels, predict(model, data.rows))
    print(f"trained {model.label} on {len(data)} rows x {data.width} (training accuracy {fit:.4f}) -> {path}", file=out)
    return 0


def cmd_predict(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    model = load_model(args.model)
    data = load_dataset(args.input, require_labels=False)
    proba = predict_proba(model, data.rows)
    frame = pd.DataFrame(
        {
            "row": np.arange(len(data), dtype=np.int64),
            "proba": proba,
            "prediction": predict(model, data.rows),
        }
    )
    if args.out:
        frame.to_csv(args.out, index=False, lineterminator="\n")
        print(f"wrote {len(frame)} predictions to {args.out}", file=out)
    else:
        frame.to_csv(out, index=False, lineterminator="\n")
    return 0


# --------------------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------------------


def load_reports(run_dir: str | Path) -> list[ExperimentReport]:
    path = Path(run_dir) / REPORTS_FILE
    if not path.exists():
        raise DataError(f"No {REPORTS_FILE} in {run_dir}; is this a fallbench run directory?")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return [ExperimentReport.from_dict(item) for item in payload]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"Unreadable {path}: {exc}") from exc


def cmd_report(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    run_dir = Path(args.run_dir)
    reports = load_reports(run_dir)
    if not reports:
        raise DataError(f"{run_dir / REPORTS_FILE} holds no reports")
    config_path = run_dir / CONFIG_FILE
    config = json.loads(config_path.read_text(encoding="utf-8")) if config_path.exists() else None
    render_tables(reports, run_dir, deltas=compute_deltas(reports), config=config)

    print(markdown_table(table2_frame(reports)), file=out)
    print(markdown_table(table4_frame(reports)), file=out)
    checks = evaluate_acceptance(reports)
    for check in checks:
        print(f"[{check.status.upper()}] {check.name}: {check.detail}", file=out)
    write_json(run_dir / "acceptance.json", [check.to_dict() for check in checks])
    if args.strict and any(check.passed is False for check in checks):
        return 2
    return 0


_COMMANDS = {
    "verify": cmd_verify,
    "ingest": cmd_ingest,
    "run": cmd_run,
    "train": cmd_train,
    "predict": cmd_predict,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except _UsageFailure:
        return 1
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)

    settings = get_settings()
    configure_console(settings.log_level)
    try:
        return _COMMANDS[args.command](args, settings, out)
    except UsageError as exc:
        print(f"fallbench: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return exit_code_for(exc)
    except FallbenchError as exc:
        print(f"fallbench: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    raise SystemExit(main())
