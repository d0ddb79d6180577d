import numpy as np
import pytest

from src.core.errors import ModelFormatError
from src.domain.features.entities import LabeledDataset
from src.domain.ingest.entities import SubjectId
from src.domain.ingest.services import load_cohort, scan_catalog
from src.utils.caching import cache_file_path, cohort_cache_key, load_cohort_cache, load_dataset, save_cohort, save_dataset


def test_cohort_cache_round_trip(fixture_root, tmp_path):
    catalog = scan_catalog(fixture_root)
    subjects = catalog.subjects
    trials = load_cohort(catalog, subjects, decimation=3)

    save_cohort(tmp_path, fixture_root, subjects, 3, trials)
    cached = load_cohort_cache(tmp_path, fixture_root, subjects, 3)

    assert cached is not None
    assert [t.key for t in cached] == [t.key for t in trials]
    for original, reloaded in zip(trials, cached):
        np.testing.assert_array_equal(reloaded.counts, original.counts)


def test_cohort_cache_key_depends_on_inputs(fixture_root, tmp_path):
    one = [SubjectId.parse("SA01")]
    two = [SubjectId.parse("SA01"), SubjectId.parse("SA02")]
    assert cohort_cache_key(fixture_root, one, 1) != cohort_cache_key(fixture_root, two, 1)
    assert cohort_cache_key(fixture_root, one, 1) != cohort_cache_key(fixture_root, one, 2)
    assert cohort_cache_key(fixture_root, one, 1) != cohort_cache_key(tmp_path, one, 1)
    assert cohort_cache_key(fixture_root, list(reversed(two)), 1) == cohort_cache_key(fixture_root, two, 1)


def test_cohort_cache_miss_and_corrupt_file(fixture_root, tmp_path):
    subjects = [SubjectId.parse("SA01")]
    assert load_cohort_cache(tmp_path, fixture_root, subjects, 1) is None

    path = cache_file_path(tmp_path, cohort_cache_key(fixture_root, subjects, 1))
    path.write_text("not,a,cohort\n1,2,3\n", encoding="utf-8")

    assert load_cohort_cache(tmp_path, fixture_root, subjects, 1) is None
    assert not path.exists()


def test_dataset_dump_reloads_bit_exact(rng, tmp_path):
    rows = rng.normal(size=(25, 3)) * np.array([1e-7, 1.0, 1e6])
    labels = rng.integers(0, 2, size=25)

    path = save_dataset(tmp_path / "dump" / "train.csv", LabeledDataset.from_arrays(rows, labels))
    data = load_dataset(path)

    assert path.read_text(encoding="utf-8").splitlines()[0] == "f1,f2,f3,label"
    assert data.rows.tobytes() == rows.tobytes()
    np.testing.assert_array_equal(data.labels, labels)


def test_dataset_without_labels(tmp_path):
    path = tmp_path / "queries.csv"
    path.write_text("f1,f2\n1.5,2\n3,4\n", encoding="utf-8")

    with pytest.raises(ModelFormatError):
        load_dataset(path)
    data = load_dataset(path, require_labels=False)
    np.testing.assert_array_equal(data.rows, [[1.5, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(data.labels, [0, 0])


def test_dataset_bad_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,label\n1,2,0\n", encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_dataset(path)
    with pytest.raises(ModelFormatError):
        load_dataset(tmp_path / "missing.csv")
