# tests/conftest.py
import logging
import os
from pathlib import Path

import numpy as np
import pytest

FIXTURE_ROOT = Path(__file__).resolve().parent / "fixtures" / "sisfall"


@pytest.fixture(autouse=True)
def reset_settings_cache(monkeypatch):
    monkeypatch.setenv("FALLBENCH_SKIP_DOTENV", "1")
    for name in (
        "FALLBENCH_CONFIG",
        "FALLBENCH_OUTPUT_DIR",
        "FALLBENCH_CACHE",
        "FALLBENCH_CACHE_DIR",
        "FALLBENCH_DECIMATION",
        "FALLBENCH_SEED",
        "FALLBENCH_KNN_ALGORITHM",
        "FALLBENCH_PARSE_WORKERS",
        "FALLBENCH_LOG_LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)
    from src.config.settings import _load_config_file, _load_dotenv_once, get_settings

    get_settings.cache_clear()
    _load_config_file.cache_clear()
    _load_dotenv_once.cache_clear()
    yield
    get_settings.cache_clear()
    _load_config_file.cache_clear()
    _load_dotenv_once.cache_clear()


@pytest.fixture(scope="session")
def fixture_root() -> Path:
    return FIXTURE_ROOT


@pytest.fixture(scope="session")
def sisfall_root() -> Path:
    """The real SisFall download, only when dataset tests are switched on."""
    if os.getenv("FALLBENCH_DATASET_TESTS", "").strip() not in {"1", "true", "yes"}:
        pytest.skip("Set FALLBENCH_DATASET_TESTS=1 and FALLBENCH_ROOT to run real-dataset checks.")
    root = os.getenv("FALLBENCH_ROOT", "").strip()
    if not root or not os.path.isdir(root):
        pytest.skip(f"FALLBENCH_ROOT is not a directory: {root!r}")
    return Path(root)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def blobs(rng):
    """Two well separated 2-D Gaussian blobs, 40 rows per class."""
    zeros = rng.normal(loc=(-3.0, -3.0), scale=0.6, size=(40, 2))
    ones = rng.normal(loc=(3.0, 3.0), scale=0.6, size=(40, 2))
    rows = np.vstack([zeros, ones])
    labels = np.array([0] * 40 + [1] * 40, dtype=np.int64)
    return rows, labels


@pytest.fixture(autouse=True)
def detach_package_log_handlers():
    yield
    logger = logging.getLogger("src")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
