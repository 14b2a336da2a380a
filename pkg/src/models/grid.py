"""
Discretization grid for the tree projection.
"""

from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

ArrayLike = Union[float, np.ndarray]

# Tolerance on (delta_max - delta_min) / step being an integer
_ENDPOINT_TOL = 1e-9


class GridSpec(BaseModel):
    """Grid {delta_min, delta_min + step, ..., delta_max}."""

    model_config = ConfigDict(frozen=True)

    delta_min: float
    delta_max: float
    step: float

    @model_validator(mode="after")
    def validate_grid(self) -> "GridSpec":
        """Endpoints must be ordered and land exactly on the grid."""
        if not self.step > 0:
            raise ValueError(f"Grid step must be positive, got {self.step}")
        if not self.delta_min < self.delta_max:
            raise ValueError(
                f"Grid needs delta_min < delta_max, got ({self.delta_min}, {self.delta_max})"
            )
        ratio = (self.delta_max - self.delta_min) / self.step
        if abs(ratio - round(ratio)) > _ENDPOINT_TOL:
            raise ValueError(
                f"(delta_max - delta_min) / step = {ratio!r} is not an integer; endpoints must lie on the grid"
            )
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse 'min,max,step'."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"Grid must be given as min,max,step, got {text!r}")
        lo, hi, step = (float(s) for s in parts)
        return cls(delta_min=lo, delta_max=hi, step=step)

    @property
    def size(self) -> int:
        return int(round((self.delta_max - self.delta_min) / self.step)) + 1

    @property
    def values(self) -> np.ndarray:
        vals = self.delta_min + self.step * np.arange(self.size, dtype=float)
        vals[-1] = self.delta_max
        return vals

    def index_of(self, x: ArrayLike) -> Union[int, np.ndarray]:
        """Index of the nearest grid point, clamped, ties toward the smaller value."""
        k = np.ceil((np.asarray(x, dtype=float) - self.delta_min) / self.step - 0.5)
        k = np.clip(k, 0, self.size - 1).astype(np.int64)
        return int(k) if k.ndim == 0 else k

    def covers(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.delta_min) and np.all(x <= self.delta_max))

    def __str__(self) -> str:
        return f"{self.delta_min!r},{self.delta_max!r},{self.step!r}"


def snap_to_grid(x: ArrayLike, grid: GridSpec) -> ArrayLike:
    """
    Round to the nearest grid point, clamped into [delta_min, delta_max].

    Works elementwise on arrays; exact midpoints go to the smaller grid value.
    """
    idx = grid.index_of(x)
    vals = grid.values
    if isinstance(idx, int):
        return float(vals[idx])
    return vals[idx]
