"""
Image input and output for lattice vectors.

Images are written as plain PGM (P2, 8-bit). The affine map from values to
gray levels is recorded in a header comment so the values can be recovered.
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from src.utils import DataFormatError, DimensionError
from .vectors import read_numeric_table

PathLike = Union[str, Path]

MAX_GRAY = 255


def write_pgm(
    path: PathLike,
    values: np.ndarray,
    rows: int,
    cols: int,
    value_range: Optional[Tuple[float, float]] = None,
) -> Path:
    """
    Write a row-major lattice vector as a P2 image.

    Args:
        path: Output file
        values: Vector of length rows * cols
        rows, cols: Lattice shape
        value_range: (low, high) mapped to gray 0 and 255; defaults to the
            data range. Values outside are clipped.

    Returns:
        The written path
    """
    values = np.asarray(values, dtype=float)
    if values.size != rows * cols:
        raise DimensionError(f"Image vector has length {values.size} but the lattice has {rows}x{cols} vertices")
    low, high = value_range if value_range is not None else (float(values.min()), float(values.max()))
    span = high - low
    scale = MAX_GRAY / span if span > 0 else 0.0
    gray = np.clip(np.rint((values - low) * scale), 0, MAX_GRAY).astype(np.int64).reshape(rows, cols)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "P2",
        f"# value = {low!r} + gray * {span / MAX_GRAY!r}",
        f"{cols} {rows}",
        str(MAX_GRAY),
    ]
    lines.extend(" ".join(str(v) for v in row) for row in gray)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_image_text(path: PathLike) -> np.ndarray:
    """Read a whitespace-separated rows x cols value matrix ('#' comments allowed)."""
    image = read_numeric_table(path, sep=r"\s+")
    if image.size == 0:
        raise DataFormatError(f"{path} holds no pixels")
    return image
