"""
Observed samples Z_1..Z_n = (x_i, y_i) for the estimation losses.
"""

from dataclasses import dataclass

import numpy as np

from src.utils import DimensionError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix X (n x p) and response y (length n)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise DimensionError(f"Design matrix must be 2-D, got shape {X.shape}")
        if y.ndim != 1:
            raise DimensionError(f"Response must be 1-D, got shape {y.shape}")
        if X.shape[0] != y.shape[0]:
            raise DimensionError(
                f"Design matrix has {X.shape[0]} rows but the response has {y.shape[0]} entries"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    def require_p(self, p: int) -> None:
        if self.p != p:
            raise DimensionError(f"Design matrix has {self.p} columns but the graph has p={p} vertices")
