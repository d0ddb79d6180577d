from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

_ROOT_LOGGER = "src"
_FILE_FORMAT = logging.Formatter(fmt="%(asctime)s | %(levelname)s | %(name)s | %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
_CONSOLE_FORMAT = logging.Formatter("%(levelname)s: %(message)s")


def configure_console(level: str = "INFO") -> logging.Logger:
    """Console handler on the package logger; repeated calls replace it."""
    logger = logging.getLogger(_ROOT_LOGGER)
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
    console = logging.StreamHandler()
    console.setLevel(_level(level))
    console.setFormatter(_CONSOLE_FORMAT)
    logger.addHandler(console)
    # Capture warnings into logging
    logging.captureWarnings(True)
    return logger


def attach_run_log(run_dir: str | Path, level: str = "INFO") -> logging.FileHandler:
    """Mirror the package log into ``run_dir/log.txt`` until ``detach_run_log``."""
    path = Path(run_dir) / "log.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    file_handler.setLevel(_level(level))
    file_handler.setFormatter(_FILE_FORMAT)
    logging.getLogger(_ROOT_LOGGER).addHandler(file_handler)
    logging.getLogger("py.warnings").addHandler(file_handler)
    return file_handler


def detach_run_log(handler: Optional[logging.FileHandler]) -> None:
    if handler is None:
        return
    logging.getLogger(_ROOT_LOGGER).removeHandler(handler)
    logging.getLogger("py.warnings").removeHandler(handler)
    handler.close()


def _level(name: str) -> int:
    value = logging.getLevelName(str(name).upper())
    return value if isinstance(value, int) else logging.INFO
