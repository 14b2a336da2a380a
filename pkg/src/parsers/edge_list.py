"""
Edge-list text format for graphs and trees.

First data line ``p m``, then m lines ``i j`` with 0-based vertices. Lines
starting with '#' are comments; a tree file starts with ``# root=<r> d_max=<d>``.
"""

import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.models import Graph, RootedTree
from src.utils import DataFormatError, get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

_TREE_HEADER = re.compile(r"#\s*root=(\d+)\s+d_max=(\d+)")


def _read_edge_rows(path: PathLike) -> Tuple[int, List[Tuple[int, int]]]:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"File not found: {path}")
    try:
        frame = pd.read_csv(path, sep=r"\s+", header=None, comment="#", dtype=str)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path} holds no data")
    except pd.errors.ParserError as e:
        raise DataFormatError(f"{path}: {e}")
    if frame.shape[1] != 2:
        raise DataFormatError(f"{path}: every line must hold two integers, found {frame.shape[1]} columns")
    try:
        rows = frame.apply(lambda col: pd.to_numeric(col, errors="raise", downcast="integer"))
    except ValueError as e:
        raise DataFormatError(f"{path}: non-integer entry ({e})")
    if rows.isna().any().any() or not all(np.issubdtype(t, np.integer) for t in rows.dtypes):
        raise DataFormatError(f"{path}: every line must hold two integers")

    values = rows.to_numpy(dtype=np.int64)
    p, m = int(values[0, 0]), int(values[0, 1])
    edges = [(int(i), int(j)) for i, j in values[1:]]
    if len(edges) != m:
        raise DataFormatError(f"{path}: header announces {m} edges but {len(edges)} follow")
    return p, edges


def read_graph(path: PathLike) -> Graph:
    """Load a graph; structural problems raise GraphStructureError."""
    p, edges = _read_edge_rows(path)
    g = Graph.from_edges(p, edges)
    logger.debug(f"Read graph p={g.p} |E|={g.num_edges} from {path}")
    return g


def write_graph(path: PathLike, g: Graph) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{g.p} {g.num_edges}"] + [f"{i} {j}" for i, j in g.edges]
    path.write_text("\n".join(lines) + "\n")
    return path


def _tree_header(path: PathLike) -> Tuple[Optional[int], Optional[int]]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            match = _TREE_HEADER.match(line)
            if match:
                return int(match.group(1)), int(match.group(2))
            if not line.startswith("#"):
                break
    return None, None


def read_tree(path: PathLike) -> RootedTree:
    """
    Load a tree. Without the header comment the root is chosen as usual and
    d_max is the tree's own maximum degree (at least 2).
    """
    p, edges = _read_edge_rows(path)
    root, d_max = _tree_header(path)
    if d_max is None:
        degree = np.bincount(np.asarray(edges, dtype=np.int64).ravel(), minlength=p) if edges else np.zeros(p)
        d_max = max(2, int(degree.max()))
    tree = RootedTree.from_edges(p, edges, d_max=d_max, root=root)
    logger.debug(f"Read tree p={tree.p} root={tree.root} d_max={tree.d_max} from {path}")
    return tree


def write_tree(path: PathLike, tree: RootedTree) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# root={tree.root} d_max={tree.d_max}", f"{tree.p} {tree.num_edges}"]
    lines.extend(f"{i} {j}" for i, j in tree.edges)
    path.write_text("\n".join(lines) + "\n")
    return path
