from __future__ import annotations

from pathlib import Path

# ---------------------------------------------------------------------------
# Errors
class FallbenchError(RuntimeError):
    exit_code = 2


class DataError(FallbenchError):
    """Bad or missing input data. Maps to exit code 2."""

    exit_code = 2


class UsageError(FallbenchError):
    """Bad invocation or contradictory options. Maps to exit code 1."""

    exit_code = 1


# ---------------------------------------------------------------------------
# Ingest
class MissingRoot(DataError):
    def __init__(self, path: str | Path):
        self.path = str(path)
        super().__init__(f"Dataset root does not exist: {self.path}")


class EmptyCatalog(DataError):
    def __init__(self, path: str | Path):
        self.path = str(path)
        super().__init__(f"No SisFall trial files found under {self.path}")


class MalformedLine(DataError):
    def __init__(self, path: str | Path, line_number: int, reason: str):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{self.path}:{line_number}: {reason}")


class OutOfRange(DataError):
    def __init__(self, path: str | Path, line_number: int, channel: int, value: int, limit: int):
        self.path = str(path)
        self.line_number = line_number
        self.channel = channel
        self.value = value
        self.limit = limit
        super().__init__(f"{self.path}:{line_number}: channel c{channel + 1} count {value} exceeds |{limit}|")


class EmptyTrial(DataError):
    def __init__(self, path: str | Path):
        self.path = str(path)
        super().__init__(f"Trial file has no data lines: {self.path}")


class UnknownSubject(DataError):
    def __init__(self, subject: str, detail: str = ""):
        self.subject = subject
        super().__init__(f"Unknown subject {subject}" + (f": {detail}" if detail else ""))


# ---------------------------------------------------------------------------
# Features / classifiers / evaluation
class EmptyInput(DataError):
    pass


class NonFinite(DataError):
    pass


class WidthMismatch(DataError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Expected {expected} feature columns, got {actual}")


class DegenerateData(DataError):
    pass


class DegenerateStratum(DataError):
    pass


class LengthMismatch(DataError):
    def __init__(self, left: int, right: int):
        super().__init__(f"Length mismatch: {left} truth labels vs {right} predictions")


class EmptyMatrix(DataError):
    pass


class ModelFormatError(DataError):
    pass


# ---------------------------------------------------------------------------
# Usage
class BadK(UsageError):
    pass


class ConflictingFlags(UsageError):
    def __init__(self, first: str, second: str, detail: str = ""):
        self.flags = (first, second)
        super().__init__(f"{first} cannot be combined with {second}" + (f": {detail}" if detail else ""))


class BadConfig(UsageError):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, FallbenchError):
        return exc.exit_code
    return 2


# ---------------------------------------------------------------------------
# Experiments
class ExperimentFailed(FallbenchError):
    """Wraps the error that stopped one experiment; keeps the cause's exit code."""

    def __init__(self, experiment_id: int, cause: FallbenchError):
        self.experiment_id = experiment_id
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"experiment {experiment_id}: {cause}")
