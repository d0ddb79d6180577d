"""Cross-cutting types shared by the domain, evaluation and CLI layers."""

from .errors import DataError, FallbenchError, UsageError, exit_code_for

__all__ = ["DataError", "FallbenchError", "UsageError", "exit_code_for"]
