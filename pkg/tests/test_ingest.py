import numpy as np
import pytest

from src.core.errors import EmptyCatalog, EmptyTrial, MalformedLine, MissingRoot, OutOfRange, UnknownSubject
from src.domain.ingest.activities import describe_activity
from src.domain.ingest.entities import (
    ADXL345,
    CHANNEL_LIMITS,
    ITG3200,
    MMA8451Q,
    ActivityCode,
    RawSample,
    SubjectId,
    TrialRecord,
)
from src.domain.ingest.services import (
    calibrate,
    calibrate_trial,
    decimate,
    format_trial,
    label_of,
    load_cohort,
    parse_trial,
    parse_trial_text,
    scan_catalog,
)

# Bundled fixture tree: 3 subjects x (D01, D02, F01, F02), trial R01.
FIXTURE_FILES = 12
FIXTURE_ROWS_PER_ACTIVITY = {"D01": 40, "D02": 36, "F01": 32, "F02": 28}
FIXTURE_ROWS = 408


def _record(counts, subject="SA01", activity="D01", trial=1) -> TrialRecord:
    return TrialRecord(
        subject=SubjectId.parse(subject),
        activity=ActivityCode.parse(activity),
        trial=trial,
        counts=np.asarray(counts, dtype=np.int64),
        source_path="<test>",
    )


def test_scan_catalog_finds_fixture_trials(fixture_root):
    catalog = scan_catalog(fixture_root)

    assert len(catalog) == FIXTURE_FILES
    assert [str(s) for s in catalog.subjects] == ["SA01", "SA02", "SE01"]
    assert catalog.counts_by_subject() == {"SA01": 4, "SA02": 4, "SE01": 4}
    assert catalog.counts_by_activity() == {"D01": 3, "D02": 3, "F01": 3, "F02": 3}
    assert len(catalog.skipped) == 1
    assert catalog.skipped[0].path.endswith("Readme.txt")


def test_scan_catalog_is_sorted_by_relative_path(fixture_root):
    catalog = scan_catalog(fixture_root)
    keys = [(str(e.subject), str(e.activity)) for e in catalog.entries]
    assert keys == sorted(keys)


def test_scan_catalog_missing_root(tmp_path):
    with pytest.raises(MissingRoot):
        scan_catalog(tmp_path / "nope")


def test_scan_catalog_empty_root(tmp_path):
    (tmp_path / "notes.txt").write_text("hello", encoding="utf-8")
    with pytest.raises(EmptyCatalog):
        scan_catalog(tmp_path)


def test_scan_catalog_skips_mismatched_subject_folder(tmp_path):
    (tmp_path / "SA01").mkdir()
    (tmp_path / "SA01" / "D01_SA01_R01.txt").write_text("1,2,3,4,5,6,7,8,9;\n", encoding="utf-8")
    (tmp_path / "SA01" / "D01_SA02_R01.txt").write_text("1,2,3,4,5,6,7,8,9;\n", encoding="utf-8")
    (tmp_path / "SA01" / "D20_SA01_R01.txt").write_text("1,2,3,4,5,6,7,8,9;\n", encoding="utf-8")

    catalog = scan_catalog(tmp_path)

    assert len(catalog) == 1
    assert len(catalog.skipped) == 2


def test_parse_fixture_row_counts(fixture_root):
    catalog = scan_catalog(fixture_root)
    for entry in catalog.entries:
        record = parse_trial(entry.source_path, entry.key)
        assert len(record) == FIXTURE_ROWS_PER_ACTIVITY[str(entry.activity)]
        assert record.counts.dtype == np.int64
        assert record.key == entry.key


def test_parse_handles_crlf_and_blank_lines(fixture_root):
    crlf = parse_trial(fixture_root / "SA02" / "D01_SA02_R01.txt", (SubjectId.parse("SA02"), ActivityCode.parse("D01"), 1))
    blanks = parse_trial(fixture_root / "SE01" / "D01_SE01_R01.txt", (SubjectId.parse("SE01"), ActivityCode.parse("D01"), 1))
    assert len(crlf) == 40
    assert len(blanks) == 40


def test_parse_line_forms_agree():
    expected = np.array([[1, -2, 3, -4, 5, -6, 7, -8, 9]], dtype=np.int64)
    for text in (
        "1,-2,3,-4,5,-6,7,-8,9;\n",
        "1,-2,3,-4,5,-6,7,-8,9\n",
        "  1, -2,\t3,-4 ,5,-6,7,-8,9 ;\r\n",
        "\n\n1,-2,3,-4,5,-6,7,-8,9;\n\n",
    ):
        np.testing.assert_array_equal(parse_trial_text(text), expected)


def test_parse_reports_malformed_line_number():
    text = "1,2,3,4,5,6,7,8,9;\n\n1,2,3,4,5,6,7,8;\n"
    with pytest.raises(MalformedLine) as info:
        parse_trial_text(text, source_path="bad.txt")
    assert info.value.line_number == 3
    assert "9" in info.value.reason


def test_parse_rejects_non_integer_field():
    with pytest.raises(MalformedLine) as info:
        parse_trial_text("1,2,3,4,x,6,7,8,9;\n")
    assert "field 5" in info.value.reason


def test_parse_rejects_out_of_range_count():
    # ADXL345 is 13-bit, so |count| may not exceed 4096.
    with pytest.raises(OutOfRange) as info:
        parse_trial_text("0,0,0,0,0,0,0,0,0;\n4097,0,0,0,0,0,0,0,0;\n")
    assert info.value.line_number == 2
    assert info.value.channel == 0


def test_parse_empty_trial():
    with pytest.raises(EmptyTrial):
        parse_trial_text("\n \n")


def test_format_trial_round_trip():
    record = _record([[1, -2, 3, -4, 5, -6, 7, -8, 9], [0, 0, 0, 0, 0, 0, 0, 0, 0]])
    text = format_trial(record)
    assert text == "1,-2,3,-4,5,-6,7,-8,9;\n0,0,0,0,0,0,0,0,0;\n"
    np.testing.assert_array_equal(parse_trial_text(text), record.counts)


def test_sensor_scales():
    assert ADXL345.scale == pytest.approx(1 / 256)
    assert ITG3200.scale == pytest.approx(4000 / 65536)
    assert MMA8451Q.scale == pytest.approx(1 / 1024)


def test_calibrate_examples():
    sample = calibrate(RawSample((256, 0, -256, 16384, 0, 0, 1024, 0, 0)))
    assert sample.accel1_g == pytest.approx((1.0, 0.0, -1.0))
    assert sample.gyro_dps[0] == pytest.approx(1000.0)
    assert sample.accel2_g[0] == pytest.approx(1.0)


def test_calibrate_trial_matches_sample_calibration():
    record = _record([[256, 0, -256, 16384, 0, 0, 1024, 0, 0], [10, 20, 30, 40, 50, 60, 70, 80, 90]])
    matrix = calibrate_trial(record)
    for row, sample in zip(matrix, record.iter_samples()):
        np.testing.assert_allclose(row, calibrate(sample).as_tuple())


def test_label_is_total_over_taxonomy():
    labels = [label_of(code) for code in ActivityCode.all()]
    assert labels.count(0) == 19
    assert labels.count(1) == 15


def test_decimate_keeps_every_nth_from_first():
    counts = np.arange(10 * 9, dtype=np.int64).reshape(10, 9)
    record = _record(counts)

    kept = decimate(record, 3)

    np.testing.assert_array_equal(kept.counts, counts[[0, 3, 6, 9]])
    assert decimate(record, 1) is record


def test_load_cohort_order_and_decimation(fixture_root):
    catalog = scan_catalog(fixture_root)
    subjects = [SubjectId.parse("SE01"), SubjectId.parse("SA01")]

    trials = load_cohort(catalog, subjects, decimation=2)

    assert [str(t.subject) for t in trials] == ["SA01"] * 4 + ["SE01"] * 4
    assert [len(t) for t in trials[:4]] == [20, 18, 16, 14]


def test_load_cohort_threads_do_not_change_order(fixture_root):
    catalog = scan_catalog(fixture_root)
    serial = load_cohort(catalog, catalog.subjects)
    threaded = load_cohort(catalog, catalog.subjects, workers=4)
    assert serial == threaded
    assert sum(len(t) for t in serial) == FIXTURE_ROWS


def test_load_cohort_unknown_subject(fixture_root):
    catalog = scan_catalog(fixture_root)
    with pytest.raises(UnknownSubject):
        load_cohort(catalog, [SubjectId.parse("SA05")])


def test_subject_and_activity_ids():
    assert len(SubjectId.all()) == 38
    assert str(SubjectId.all()[0]) == "SA01"
    assert str(SubjectId.all()[-1]) == "SE15"
    with pytest.raises(ValueError):
        SubjectId.parse("SA24")
    with pytest.raises(ValueError):
        ActivityCode.parse("F16")


def test_describe_activity():
    assert describe_activity("D01") == "Walking slowly"
    assert describe_activity(ActivityCode.parse("f01")).startswith("Fall forward")
    with pytest.raises(ValueError):
        describe_activity("X99")


def test_parse_rejects_non_ascii_digits():
    # U+0663 ARABIC-INDIC DIGIT THREE
    with pytest.raises(MalformedLine) as info:
        parse_trial_text("1,2,3,4,5,6,7,8,9;\n1,2,3,4,5,6,7,8,٣;\n", source_path="digits.txt")
    assert info.value.line_number == 2
    assert "field 9" in info.value.reason


def test_format_trial_round_trips_every_fixture_file(fixture_root):
    catalog = scan_catalog(fixture_root)
    for entry in catalog.entries:
        record = parse_trial(entry.source_path, entry.key)
        np.testing.assert_array_equal(parse_trial_text(format_trial(record)), record.counts)


def test_calibrate_is_linear(rng):
    limits = CHANNEL_LIMITS // 2
    for _ in range(200):
        a = rng.integers(-limits, limits + 1)
        b = rng.integers(-limits, limits + 1)
        summed = np.asarray(calibrate(RawSample(tuple(int(v) for v in a + b))).as_tuple())
        parts = np.asarray(calibrate(RawSample(tuple(int(v) for v in a))).as_tuple()) + np.asarray(
            calibrate(RawSample(tuple(int(v) for v in b))).as_tuple()
        )
        np.testing.assert_allclose(summed, parts, rtol=0, atol=1e-12)


def test_scan_catalog_is_deterministic(fixture_root):
    first = scan_catalog(fixture_root)
    second = scan_catalog(fixture_root)
    assert first.entries == second.entries
    assert first.skipped == second.skipped


def test_larger_decimation_never_keeps_more_samples():
    for length in (1, 2, 7, 40, 41):
        record = _record(np.zeros((length, 9), dtype=np.int64))
        kept = [len(decimate(record, factor)) for factor in range(1, 12)]
        assert kept[0] == length
        assert all(later <= earlier for earlier, later in zip(kept, kept[1:]))
