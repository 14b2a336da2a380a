"""
Exception hierarchy for the tree-PGD toolkit and its mapping to CLI exit codes.
"""

import click
from pydantic import ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class TreePgdError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_DATA


class ParameterError(TreePgdError, ValueError):
    """An algorithm knob is outside its valid range."""

    exit_code = EXIT_USAGE


class InstanceTooLargeError(ParameterError):
    """The exhaustive oracle refuses an instance above its size guard."""


class DimensionError(TreePgdError, ValueError):
    """Lengths or shapes of inputs disagree."""

    exit_code = EXIT_DATA


class GraphStructureError(DimensionError):
    """Self-loops, duplicate edges or out-of-range vertices."""


class DisconnectedGraphError(DimensionError):
    """A connected graph was required."""

    def __init__(self, unreachable_vertex: int, start_vertex: int = 0):
        self.unreachable_vertex = unreachable_vertex
        super().__init__(
            f"Graph is not connected: vertex {unreachable_vertex} is unreachable from vertex {start_vertex}"
        )


class DataFormatError(TreePgdError, ValueError):
    """An input file could not be parsed."""

    exit_code = EXIT_DATA


class NumericError(TreePgdError, ArithmeticError):
    """Non-finite values appeared in a computation."""

    exit_code = EXIT_NUMERIC


class InternalInvariantError(TreePgdError, RuntimeError):
    """An internal table is inconsistent with the inputs it was built from."""

    exit_code = EXIT_NUMERIC


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code contract."""
    if isinstance(exc, TreePgdError):
        return exc.exit_code
    if isinstance(exc, (click.UsageError, ValidationError)):
        return EXIT_USAGE
    return EXIT_DATA
