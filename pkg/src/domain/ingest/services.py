from __future__ import annotations

import io
import logging
import re
import time
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.errors import (
    BadConfig,
    EmptyCatalog,
    EmptyTrial,
    MalformedLine,
    MissingRoot,
    OutOfRange,
    UnknownSubject,
)
from src.domain.ingest.entities import (
    CHANNEL_LIMITS,
    CHANNEL_NAMES,
    CHANNEL_SCALES,
    ActivityCode,
    CalibratedSample,
    Catalog,
    CatalogEntry,
    RawSample,
    SkippedFile,
    SubjectId,
    TrialRecord,
)

__all__ = [
    "scan_catalog",
    "parse_trial",
    "parse_trial_text",
    "format_trial",
    "calibrate",
    "calibrate_trial",
    "label_of",
    "decimate",
    "load_cohort",
]

LOG = logging.getLogger(__name__)

_TRIAL_FILE_RE = re.compile(r"^(?P<activity>[DF][0-9]{2})_(?P<subject>S[AE][0-9]{2})_R(?P<trial>[0-9]{2,3})\.txt$")
_SUBJECT_DIR_RE = re.compile(r"^S[AE][0-9]{2}$")
# Nine signed integers, optional single ';', spaces/tabs allowed around fields.
_DATA_LINE_RE = re.compile(r"^[ \t]*[+-]?[0-9]{1,18}(?:[ \t]*,[ \t]*[+-]?[0-9]{1,18}){8}[ \t]*;?[ \t]*$")
_INT_TOKEN_RE = re.compile(r"^[+-]?[0-9]+$")

ExpectedKey = tuple[SubjectId, ActivityCode, int]

# --------------------------------------------------------------------------------------
# Catalog
# --------------------------------------------------------------------------------------


def scan_catalog(root_dir: str | Path) -> Catalog:
    """Discover every ``{activity}_{subject}_R{trial}.txt`` file under ``root_dir``.

    Entries are sorted by their path relative to the root. Files that do not
    belong in the catalog are kept in ``Catalog.skipped`` with a reason.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise MissingRoot(root)

    started = time.perf_counter()
    files = sorted((p for p in root.rglob("*") if p.is_file()), key=lambda p: p.relative_to(root).as_posix())
    entries: list[CatalogEntry] = []
    skipped: list[SkippedFile] = []
    seen: dict[ExpectedKey, str] = {}

    for path in files:
        rel = path.relative_to(root)
        reason = _skip_reason(rel)
        if reason:
            skipped.append(SkippedFile(path=str(path), reason=reason))
            continue
        match = _TRIAL_FILE_RE.match(rel.name)
        assert match is not None
        try:
            activity = ActivityCode.parse(match.group("activity"))
            subject = SubjectId.parse(match.group("subject"))
        except ValueError as exc:
            skipped.append(SkippedFile(path=str(path), reason=str(exc)))
            continue
        trial = int(match.group("trial"))
        if trial < 1:
            skipped.append(SkippedFile(path=str(path), reason="trial number must be positive"))
            continue
        key = (subject, activity, trial)
        if key in seen:
            skipped.append(SkippedFile(path=str(path), reason=f"duplicate of {seen[key]}"))
            continue
        seen[key] = str(path)
        entries.append(CatalogEntry(source_path=str(path), subject=subject, activity=activity, trial=trial))

    if not entries:
        raise EmptyCatalog(root)
    LOG.info(
        "Scanned %s: %d trial files, %d skipped in %.2fs",
        root,
        len(entries),
        len(skipped),
        time.perf_counter() - started,
    )
    return Catalog(root=str(root), entries=tuple(entries), skipped=tuple(skipped))


def _skip_reason(rel: Path) -> str:
    if len(rel.parts) != 2:
        return "not directly inside a subject directory"
    folder, name = rel.parts
    if not _SUBJECT_DIR_RE.match(folder):
        return f"unknown subject directory {folder}"
    match = _TRIAL_FILE_RE.match(name)
    if match is None:
        return "file name does not match {activity}_{subject}_R{trial}.txt"
    if match.group("subject") != folder:
        return f"subject {match.group('subject')} does not match folder {folder}"
    return ""


# --------------------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------------------


def parse_trial(path: str | Path, expected: ExpectedKey) -> TrialRecord:
    """Parse one trial file into a TrialRecord tagged with ``expected``."""
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedLine(source, 0, f"file is not UTF-8 text ({exc.reason})") from exc
    counts = parse_trial_text(text, source_path=str(source))
    subject, activity, trial = expected
    return TrialRecord(subject=subject, activity=activity, trial=trial, counts=counts, source_path=str(source))


def parse_trial_text(text: str, *, source_path: str = "<memory>") -> np.ndarray:
    """Parse SisFall line-format text into an (n, 9) int64 count matrix.

    Accepts a trailing ';', surrounding spaces/tabs, CRLF or LF endings and
    blank lines; anything else raises MalformedLine with its 1-based line number.
    """
    bodies: list[str] = []
    line_numbers: list[int] = []
    for number, line in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        if not line.strip():
            continue
        if _DATA_LINE_RE.match(line) is None:
            raise MalformedLine(source_path, number, _diagnose(line))
        bodies.append(line.replace(" ", "").replace("\t", "").rstrip(";"))
        line_numbers.append(number)
    if not bodies:
        raise EmptyTrial(source_path)

    try:
        frame = pd.read_csv(io.StringIO("\n".join(bodies)), header=None, names=list(CHANNEL_NAMES), dtype=np.int64)
    except ValueError as exc:
        position = _first_unreadable(bodies)
        raise MalformedLine(source_path, line_numbers[position], f"not readable as integers: {exc}") from exc
    counts = frame.to_numpy(dtype=np.int64, copy=True)

    over = np.abs(counts) > CHANNEL_LIMITS
    if over.any():
        row, col = (int(v) for v in np.argwhere(over)[0])
        raise OutOfRange(source_path, line_numbers[row], col, int(counts[row, col]), int(CHANNEL_LIMITS[col]))
    return counts


def _first_unreadable(bodies: list[str]) -> int:
    for position, body in enumerate(bodies):
        if not all(_INT_TOKEN_RE.match(token) for token in body.split(",")):
            return position
    return 0


def _diagnose(line: str) -> str:
    body = line.strip()
    if body.endswith(";"):
        body = body[:-1]
    tokens = body.split(",")
    if len(tokens) != 9:
        return f"expected 9 comma-separated fields, found {len(tokens)}"
    for position, token in enumerate(tokens, start=1):
        stripped = token.strip()
        if not _INT_TOKEN_RE.match(stripped):
            return f"field {position} is not an integer: {stripped!r}"
        if len(stripped.lstrip("+-")) > 18:
            return f"field {position} has too many digits"
    return "unexpected characters"


def format_trial(record: TrialRecord) -> str:
    """Serialize a record back to the SisFall line format (';'-terminated, LF)."""
    lines = (",".join(str(int(v)) for v in row) + ";" for row in record.counts)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------------------
# Calibration & labels
# --------------------------------------------------------------------------------------


def calibrate(sample: RawSample) -> CalibratedSample:
    values = np.asarray(sample.counts, dtype=np.float64) * CHANNEL_SCALES
    return CalibratedSample(
        accel1_g=(float(values[0]), float(values[1]), float(values[2])),
        gyro_dps=(float(values[3]), float(values[4]), float(values[5])),
        accel2_g=(float(values[6]), float(values[7]), float(values[8])),
    )


def calibrate_trial(record: TrialRecord) -> np.ndarray:
    return record.counts.astype(np.float64) * CHANNEL_SCALES


def label_of(activity: ActivityCode) -> int:
    return 1 if activity.is_fall else 0


# --------------------------------------------------------------------------------------
# Cohorts
# --------------------------------------------------------------------------------------


def decimate(record: TrialRecord, decimation: int) -> TrialRecord:
    """Keep every ``decimation``-th sample, starting with the first."""
    if decimation < 1:
        raise BadConfig(f"decimation must be >= 1, got {decimation}")
    if decimation == 1:
        return record
    return TrialRecord(
        subject=record.subject,
        activity=record.activity,
        trial=record.trial,
        counts=np.ascontiguousarray(record.counts[::decimation]),
        source_path=record.source_path,
    )


def load_cohort(
    catalog: Catalog,
    subjects: Iterable[SubjectId],
    decimation: int = 1,
    *,
    workers: int = 1,
) -> list[TrialRecord]:
    """Parse every catalog entry of ``subjects``, in catalog order.

    Files are parsed on up to ``workers`` threads; the result order never
    depends on scheduling.
    """
    if decimation < 1:
        raise BadConfig(f"decimation must be >= 1, got {decimation}")
    wanted = frozenset(subjects)
    known = set(catalog.subjects)
    for subject in sorted(wanted):
        if subject not in known:
            raise UnknownSubject(str(subject), f"no trial files under {catalog.root}")

    chosen = catalog.for_subjects(wanted)
    started = time.perf_counter()

    def _load(entry: CatalogEntry) -> TrialRecord:
        return decimate(parse_trial(entry.source_path, entry.key), decimation)

    if workers > 1 and len(chosen) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(chosen)), thread_name_prefix="fallbench-parse") as executor:
            records = list(executor.map(_load, chosen))
    else:
        records = [_load(entry) for entry in chosen]

    LOG.info(
        "Loaded %d trials (%d samples, decimation %d) for %d subjects in %.2fs",
        len(records),
        sum(len(r) for r in records),
        decimation,
        len(wanted),
        time.perf_counter() - started,
    )
    return records
