"""Splitting, cross-validation and confusion-matrix metrics."""

from src.evaluation.metrics import ConfusionMatrix, MetricSet, accuracy, confusion, metrics, per_class_metrics
from src.evaluation.runner import CrossValidationResult, cross_validate, select_best
from src.evaluation.splits import FoldPlan, SplitPlan, k_fold, train_test_split

__all__ = [
    "ConfusionMatrix",
    "CrossValidationResult",
    "FoldPlan",
    "MetricSet",
    "SplitPlan",
    "accuracy",
    "confusion",
    "cross_validate",
    "k_fold",
    "metrics",
    "per_class_metrics",
    "select_best",
    "train_test_split",
]
