"""Simulation package: Monte Carlo harness and CSV reporting."""

from .harness import (
    ExperimentSpec,
    SimSummary,
    SummaryRow,
    run_experiment,
    run_sensitivity,
    sensitivity_spec,
    cardinality_trace,
)
from .reporting import write_summary, read_observation_csv, write_interval_csv, read_interval_csv

__all__ = [
    "ExperimentSpec",
    "SimSummary",
    "SummaryRow",
    "run_experiment",
    "run_sensitivity",
    "sensitivity_spec",
    "cardinality_trace",
    "write_summary",
    "read_observation_csv",
    "write_interval_csv",
    "read_interval_csv",
]
