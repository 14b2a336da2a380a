"""Tree construction, tree projection and reference oracles."""

from .tree_builder import SpanningTree, spanning_tree_dfs, cap_degree, build_tree, tree_rng
from .tree_projection import DpTable, ProjectionResult, dp_forward, dp_backtrack, project_tree
from .oracle import (
    BruteForceResult,
    LineProjectionResult,
    SegmentDpTable,
    brute_force_project,
    exact_line_projection,
    segment_table,
)

__all__ = [
    "SpanningTree",
    "spanning_tree_dfs",
    "cap_degree",
    "build_tree",
    "tree_rng",
    "DpTable",
    "ProjectionResult",
    "dp_forward",
    "dp_backtrack",
    "project_tree",
    "BruteForceResult",
    "LineProjectionResult",
    "SegmentDpTable",
    "brute_force_project",
    "exact_line_projection",
    "segment_table",
]
