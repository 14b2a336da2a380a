"""
Plain-text vectors and CSV design matrices.

Vectors are one value per line; lines starting with '#' are comments.
Values are written with repr().
"""

from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd

from src.utils import DataFormatError, get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def read_numeric_table(path: PathLike, sep: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"File not found: {path}")
    try:
        frame = pd.read_csv(path, sep=sep, header=None, comment="#", dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path} holds no data")
    except pd.errors.ParserError as e:
        raise DataFormatError(f"{path}: {e}")
    try:
        values = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="raise")).to_numpy(dtype=float)
    except (ValueError, AttributeError) as e:
        raise DataFormatError(f"{path}: non-numeric entry ({e})")
    if np.isnan(values).any():
        row = int(np.flatnonzero(np.isnan(values).any(axis=1))[0])
        raise DataFormatError(f"{path}: missing value in data row {row}")
    return values


def read_vector(path: PathLike) -> np.ndarray:
    """Read a vector written one value per line."""
    values = read_numeric_table(path, sep=r"\s+")
    if values.shape[1] != 1:
        raise DataFormatError(f"{path}: expected one value per line, found {values.shape[1]} columns")
    vector = values[:, 0]
    logger.debug(f"Read vector of length {vector.size} from {path}")
    return vector


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """Read a comma-separated matrix without a header row, one matrix row per line."""
    matrix = read_numeric_table(path, sep=",")
    logger.debug(f"Read {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}")
    return matrix


def write_vector(path: PathLike, values: np.ndarray, header: Optional[Iterable[str]] = None) -> Path:
    """Write one value per line, preceded by optional '# ' comment lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {h}" for h in (header or [])]
    lines.extend(repr(float(v)) for v in np.asarray(values, dtype=float))
    path.write_text("\n".join(lines) + "\n")
    return path
