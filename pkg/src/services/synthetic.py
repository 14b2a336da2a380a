"""
Synthetic lattice instances: graphs, piecewise-constant truth images and
Gaussian-design samples.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from src.models import EXPERIMENT_GRID, Dataset, Graph, GridSpec, LatticeSpec, gradient_sparsity, snap_to_grid
from src.parsers import read_image_text
from src.utils import DimensionError, ParameterError, get_logger

logger = get_logger(__name__)

# Built-in image levels; all lie on the default experiment grid
HIGH_VALUE = 0.9
LOW_VALUE = -0.5
BACKGROUND_VALUE = 0.2

# Rectangle corners as fractions of the lattice, [start, stop) per axis
_RECT_HIGH = ((5 / 30, 15 / 30), (4 / 30, 14 / 30))
_RECT_LOW = ((17 / 30, 27 / 30), (16 / 30, 26 / 30))


@dataclass(frozen=True, eq=False)
class TruthImage:
    """Row-major truth vector with its lattice gradient sparsity s*."""

    theta: np.ndarray
    s_star: int
    rows: int
    cols: int

    def as_matrix(self) -> np.ndarray:
        return self.theta.reshape(self.rows, self.cols)


def make_lattice(spec: LatticeSpec) -> Graph:
    """
    4-neighbour lattice, vertex r * cols + c for row r and column c.

    Edges are listed per vertex in row-major order: right neighbour, then
    the one below.
    """
    rows, cols = spec.rows, spec.cols
    if rows < 1 or cols < 1:
        raise ParameterError(f"Lattice dimensions must be positive, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def lattice_column_major_priority(spec: LatticeSpec) -> np.ndarray:
    """
    Neighbour rank c * rows + r for vertex (r, c).

    A deterministic DFS from vertex 0 under this rank runs down the first
    column, up the second and so on, giving a vertical zig-zag line.
    """
    r, c = np.divmod(np.arange(spec.p), spec.cols)
    return c * spec.rows + r


def _block(n: int, bounds) -> slice:
    return slice(int(round(n * bounds[0])), int(round(n * bounds[1])))


def make_truth_image(
    spec: LatticeSpec,
    truth: str = "two_rectangles",
    path: Optional[Union[str, Path]] = None,
    grid: Optional[GridSpec] = None,
) -> TruthImage:
    """
    Piecewise-constant truth on the lattice.

    Args:
        spec: Lattice shape
        truth: Built-in image: "two_rectangles", "half_plane" or "constant"
        path: Text image (rows x cols values) overriding the built-in one
        grid: Grid the values must lie on; EXPERIMENT_GRID by default

    Returns:
        TruthImage; s* is recomputed from the lattice gradient

    Raises:
        DimensionError: The image file does not match the lattice shape
        ParameterError: A value does not lie on the grid
    """
    grid = grid or EXPERIMENT_GRID
    rows, cols = spec.rows, spec.cols

    if path is not None:
        image = read_image_text(path)
        if image.shape != (rows, cols):
            raise DimensionError(
                f"Image file {path} is {image.shape[0]}x{image.shape[1]} but the lattice is {rows}x{cols}"
            )
    elif truth == "constant":
        image = np.full((rows, cols), BACKGROUND_VALUE)
    elif truth == "half_plane":
        image = np.full((rows, cols), LOW_VALUE)
        image[:, cols // 2 :] = HIGH_VALUE
    elif truth == "two_rectangles":
        image = np.full((rows, cols), BACKGROUND_VALUE)
        image[_block(rows, _RECT_HIGH[0]), _block(cols, _RECT_HIGH[1])] = HIGH_VALUE
        image[_block(rows, _RECT_LOW[0]), _block(cols, _RECT_LOW[1])] = LOW_VALUE
    else:
        raise ParameterError(f"Unknown truth image {truth!r}")

    theta = image.reshape(-1).astype(float)
    snapped = snap_to_grid(theta, grid)
    off_grid = np.flatnonzero(np.abs(snapped - theta) > 1e-9)
    if off_grid.size:
        v = int(off_grid[0])
        raise ParameterError(f"Truth value {theta[v]!r} at vertex {v} is not on the grid {grid}")

    s_star = gradient_sparsity(make_lattice(spec), snapped)
    logger.info(f"Truth image '{truth if path is None else path}' on {rows}x{cols}: s*={s_star}")
    return TruthImage(theta=snapped, s_star=s_star, rows=rows, cols=cols)


def generate_linear_data(theta_star: np.ndarray, n: int, sigma: float, rng: np.random.Generator) -> Dataset:
    """y = X theta* + e with X_ij ~ N(0, 1) and e_i ~ N(0, sigma^2)."""
    if n < 1:
        raise ParameterError(f"Sample count must be at least 1, got {n}")
    if not sigma > 0:
        raise ParameterError(f"Noise level must be positive, got {sigma}")
    theta_star = np.asarray(theta_star, dtype=float)
    X = rng.standard_normal((n, theta_star.size))
    y = X @ theta_star + sigma * rng.standard_normal(n)
    return Dataset(X=X, y=y)


def generate_logistic_data(theta_star: np.ndarray, n: int, rng: np.random.Generator) -> Dataset:
    """Gaussian design with y_i ~ Bernoulli(sigmoid(x_i' theta*))."""
    if n < 1:
        raise ParameterError(f"Sample count must be at least 1, got {n}")
    theta_star = np.asarray(theta_star, dtype=float)
    X = rng.standard_normal((n, theta_star.size))
    y = (rng.random(n) < expit(X @ theta_star)).astype(float)
    return Dataset(X=X, y=y)
