"""Estimation engine, synthetic instances and the simulation harness."""

from .pgd_engine import (
    IterationRecord,
    PgdTrace,
    PgdResult,
    TRACE_COLUMNS,
    run_tree_pgd,
    corollary1_config,
    default_grid,
)
from .synthetic import (
    TruthImage,
    make_lattice,
    lattice_column_major_priority,
    make_truth_image,
    generate_linear_data,
    generate_logistic_data,
)
from .simulation import (
    ExperimentRunner,
    ResultTable,
    RunJob,
    RUN_COLUMNS,
    SUMMARY_COLUMNS,
    experiment_rng,
    run_experiment,
    sparsity_levels,
)

__all__ = [
    "IterationRecord",
    "PgdTrace",
    "PgdResult",
    "TRACE_COLUMNS",
    "run_tree_pgd",
    "corollary1_config",
    "default_grid",
    "TruthImage",
    "make_lattice",
    "lattice_column_major_priority",
    "make_truth_image",
    "generate_linear_data",
    "generate_logistic_data",
    "ExperimentRunner",
    "ResultTable",
    "RunJob",
    "RUN_COLUMNS",
    "SUMMARY_COLUMNS",
    "experiment_rng",
    "run_experiment",
    "sparsity_levels",
]
