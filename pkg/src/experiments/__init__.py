"""The six cohort x feature-view experiments and their report tables."""

from src.experiments.entities import DeltaReport, ExperimentReport, ExperimentSpec
from src.experiments.services import cohort_subjects, compute_deltas, run_all, run_experiment, sweep_single_subjects

__all__ = [
    "DeltaReport",
    "ExperimentReport",
    "ExperimentSpec",
    "cohort_subjects",
    "compute_deltas",
    "run_all",
    "run_experiment",
    "sweep_single_subjects",
]
