"""Seeded Monte Carlo lab: data-generating processes, the replication runner,
and report serialization."""

from .dgps import (
    P3_NORMALIZER,
    SETTINGS,
    DgpParams,
    DgpSpec,
    HeavyTailSampler,
    draw,
    frozen_params,
    p3_sampler,
    rng_stream,
)
from .report import format_report_text, report_rows, write_report_csv, write_report_json
from .runner import (
    DEFAULT_ESTIMATORS,
    EstimatorStats,
    SimulationCell,
    SimulationReport,
    make_cell,
    run_table1,
    run_table2,
)

__all__ = [
    "P3_NORMALIZER",
    "SETTINGS",
    "DgpParams",
    "DgpSpec",
    "HeavyTailSampler",
    "draw",
    "frozen_params",
    "p3_sampler",
    "rng_stream",
    "DEFAULT_ESTIMATORS",
    "EstimatorStats",
    "SimulationCell",
    "SimulationReport",
    "make_cell",
    "run_table1",
    "run_table2",
    "format_report_text",
    "report_rows",
    "write_report_csv",
    "write_report_json",
]
