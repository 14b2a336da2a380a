"""
Configuration models for estimation runs and simulation experiments.
"""

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .grid import GridSpec
from .tree import TreePolicy

TreeMode = Literal["fixed_dfs", "random_dfs"]

# Simulation settings of the lattice recovery experiment
EXPERIMENT_GRID = GridSpec(delta_min=-0.6, delta_max=1.0, step=0.05)
EXPERIMENT_ETA = 0.2
EXPERIMENT_TAU = 80
EXPERIMENT_SIGMAS = (1.0, 1.5, 2.0, 2.5, 3.0)


class PgdConfig(BaseModel):
    """Knobs of one tree-PGD run."""

    model_config = ConfigDict(frozen=True)

    sparsity: int = Field(..., description="Projection sparsity S")
    eta: Optional[float] = Field(default=None, description="Step size; defaults to 1/L")
    tau: int = Field(default=50, description="Iteration count")
    grid: Optional[GridSpec] = Field(default=None, description="Projection grid; derived at runtime if absent")
    tree_policy: TreePolicy = Field(default_factory=TreePolicy)
    theta0: Optional[List[float]] = Field(default=None, description="Initial iterate; all-zero if absent")
    record_history: bool = False
    stop_on_fixed_point: bool = False

    # Used only when the grid is derived at runtime
    theta_norm_bound: Optional[float] = Field(default=None, description="Bound on ||theta*||_2")
    grid_step: float = Field(default=0.05)

    # Overrides the loss's own smoothness estimate
    smoothness: Optional[float] = None

    @field_validator("sparsity")
    @classmethod
    def validate_sparsity(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"Sparsity S must be nonnegative, got {v}")
        return v

    @field_validator("eta", "smoothness", "theta_norm_bound")
    @classmethod
    def validate_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError(f"Value must be strictly positive, got {v}")
        return v

    @field_validator("tau")
    @classmethod
    def validate_tau(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"tau must be at least 1, got {v}")
        return v

    @field_validator("grid_step")
    @classmethod
    def validate_grid_step(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"Grid step must be positive, got {v}")
        return v


class LatticeSpec(BaseModel):
    """rows x cols 4-neighbour lattice, vertices in row-major order."""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(default=30)
    cols: int = Field(default=30)

    @field_validator("rows", "cols")
    @classmethod
    def validate_dimension(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"Lattice dimensions must be positive, got {v}")
        return v

    @property
    def p(self) -> int:
        return self.rows * self.cols

    @property
    def num_edges(self) -> int:
        return self.rows * (self.cols - 1) + self.cols * (self.rows - 1)


class MethodSpec(BaseModel):
    """One tree-PGD configuration compared in an experiment."""

    model_config = ConfigDict(frozen=True)

    name: str
    tree_mode: TreeMode = "random_dfs"
    d_max: int = 2
    sparsity: Optional[List[int]] = Field(
        default=None, description="Explicit S values; a multiple-of-s* sweep if absent"
    )
    eta: float = EXPERIMENT_ETA
    tau: int = EXPERIMENT_TAU
    grid: GridSpec = EXPERIMENT_GRID

    @field_validator("d_max")
    @classmethod
    def validate_d_max(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"d_max must be at least 2, got {v}")
        return v

    @field_validator("sparsity")
    @classmethod
    def validate_sparsity(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or any(s < 0 for s in v)):
            raise ValueError("Sparsity list must be nonempty and nonnegative")
        return v

    @classmethod
    def parse(cls, text: str, **overrides) -> "MethodSpec":
        """
        Parse '<fixed|random>:<d_max>[:<S1>,<S2>,...]'.

        Examples: 'fixed:2', 'random:3', 'random:2:40,80'.
        """
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"Method must look like 'random:2' or 'fixed:2:40,80', got {text!r}")
        mode_key, d_max_text = parts[0].strip().lower(), parts[1].strip()
        modes = {"fixed": "fixed_dfs", "random": "random_dfs"}
        if mode_key not in modes:
            raise ValueError(f"Tree mode must be 'fixed' or 'random', got {mode_key!r}")
        d_max = int(d_max_text)
        sparsity = None
        if len(parts) == 3 and parts[2].strip():
            sparsity = [int(s) for s in parts[2].split(",")]
        name = "fixed-line" if mode_key == "fixed" and d_max == 2 else f"{mode_key}-d{d_max}"
        return cls(name=name, tree_mode=modes[mode_key], d_max=d_max, sparsity=sparsity, **overrides)


def experiment_methods() -> List[MethodSpec]:
    """The four tree constructions compared in the lattice recovery experiment."""
    return [MethodSpec.parse(m) for m in ("fixed:2", "random:2", "random:3", "random:4")]


class ExperimentSpec(BaseModel):
    """Lattice recovery experiment."""

    model_config = ConfigDict(frozen=True)

    lattice: LatticeSpec = Field(default_factory=LatticeSpec)
    truth: Literal["two_rectangles", "half_plane", "constant"] = "two_rectangles"
    truth_path: Optional[Path] = None
    n: int = 500
    sigmas: List[float] = Field(default_factory=lambda: list(EXPERIMENT_SIGMAS))
    replicates: int = 20
    methods: List[MethodSpec] = Field(default_factory=experiment_methods)
    seed: int = Field(default=0, ge=0)

    @field_validator("n", "replicates")
    @classmethod
    def validate_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"Count must be at least 1, got {v}")
        return v

    @field_validator("sigmas")
    @classmethod
    def validate_sigmas(cls, v: List[float]) -> List[float]:
        if not v or any(not s > 0 for s in v):
            raise ValueError("Noise levels must be a nonempty list of positive values")
        return v

    @field_validator("methods")
    @classmethod
    def validate_methods(cls, v: List[MethodSpec]) -> List[MethodSpec]:
        if not v:
            raise ValueError("At least one method is required")
        names = [m.name for m in v]
        if len(set(names)) != len(names):
            raise ValueError(f"Method names must be unique, got {names}")
        return v
