"""Domain types for the tree-PGD toolkit."""

from .graph import (
    Graph,
    GradientVector,
    Partition,
    gradient,
    gradient_sparsity,
    induce_partition,
    partition_boundary,
    project_onto_partition,
)
from .grid import GridSpec, snap_to_grid
from .tree import RootedTree, TreePolicy, NO_PARENT
from .dataset import Dataset
from .configs import (
    PgdConfig,
    LatticeSpec,
    MethodSpec,
    ExperimentSpec,
    experiment_methods,
    EXPERIMENT_GRID,
    EXPERIMENT_ETA,
    EXPERIMENT_TAU,
    EXPERIMENT_SIGMAS,
)

__all__ = [
    "Graph",
    "GradientVector",
    "Partition",
    "gradient",
    "gradient_sparsity",
    "induce_partition",
    "partition_boundary",
    "project_onto_partition",
    "GridSpec",
    "snap_to_grid",
    "RootedTree",
    "TreePolicy",
    "NO_PARENT",
    "Dataset",
    "PgdConfig",
    "LatticeSpec",
    "MethodSpec",
    "ExperimentSpec",
    "experiment_methods",
    "EXPERIMENT_GRID",
    "EXPERIMENT_ETA",
    "EXPERIMENT_TAU",
    "EXPERIMENT_SIGMAS",
]
