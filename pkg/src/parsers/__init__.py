"""Readers and writers for graphs, trees, vectors and images."""

from .edge_list import read_graph, write_graph, read_tree, write_tree
from .vectors import read_vector, write_vector, read_matrix_csv
from .images import write_pgm, read_image_text

__all__ = [
    "read_graph",
    "write_graph",
    "read_tree",
    "write_tree",
    "read_vector",
    "write_vector",
    "read_matrix_csv",
    "write_pgm",
    "read_image_text",
]
