"""Benchmark harness: uniform-access and LRU workloads, statistics, CSV output."""

from .config import ConfigError, WorkloadConfig
from .results import BenchResult, ci99_halfwidth, emit_csv, read_csv
from .workloads import (
    InvariantViolation, fit_inverse_log, run, run_dummy_sweep, run_lru,
    run_uniform, sweep_table,
)

__all__ = [
    "BenchResult", "ConfigError", "InvariantViolation", "WorkloadConfig",
    "ci99_halfwidth", "emit_csv", "fit_inverse_log", "read_csv", "run",
    "run_dummy_sweep", "run_lru", "run_uniform", "sweep_table",
]
