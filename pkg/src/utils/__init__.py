"""Utility modules for the tree-PGD toolkit."""

from .logger import get_logger, run_context, setup_logging
from .errors import (
    TreePgdError,
    ParameterError,
    InstanceTooLargeError,
    DimensionError,
    GraphStructureError,
    DisconnectedGraphError,
    DataFormatError,
    NumericError,
    InternalInvariantError,
    exit_code_for,
)

__all__ = [
    "get_logger",
    "setup_logging",
    "run_context",
    "TreePgdError",
    "ParameterError",
    "InstanceTooLargeError",
    "DimensionError",
    "GraphStructureError",
    "DisconnectedGraphError",
    "DataFormatError",
    "NumericError",
    "InternalInvariantError",
    "exit_code_for",
]
