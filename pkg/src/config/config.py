"""
Configuration management for the tree-PGD toolkit.
Handles environment variables, default algorithm constants and output paths.
"""

from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="TREEPGD_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Project paths
    project_root: Path = Field(default_factory=lambda: Path(__file__).parent.parent.parent)
    output_dir: str = Field(default="data/output")

    # Logging
    log_level: str = Field(default="INFO")
    log_file: Optional[str] = Field(default=None)

    # Execution
    max_workers: int = Field(default=1)
    default_seed: int = Field(default=0, ge=0)

    # Numerical defaults
    default_grid_step: float = Field(default=0.05)
    power_iterations: int = Field(default=20)

    # Oracle guard rails
    brute_force_max_p: int = Field(default=12)
    brute_force_max_grid: int = Field(default=6)

    # Parameter recipe constants (left unspecified by the theory)
    corollary_c1: float = Field(default=4.0)
    corollary_c2: float = Field(default=3.0)
    corollary_c3: float = Field(default=4.0)

    # Sparsity sweep used when an experiment method names no explicit S
    s_multipliers: Tuple[int, ...] = Field(default=(2, 4, 6))

    @field_validator("max_workers", "power_iterations", "brute_force_max_p", "brute_force_max_grid")
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        """Counts must be at least one."""
        if v < 1:
            raise ValueError("Value must be a positive integer")
        return v

    @field_validator("default_grid_step", "corollary_c1", "corollary_c2", "corollary_c3")
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """Steps and recipe constants must be strictly positive."""
        if not v > 0:
            raise ValueError("Value must be strictly positive")
        return v

    @field_validator("s_multipliers")
    @classmethod
    def validate_multipliers(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(m < 1 for m in v):
            raise ValueError("Sparsity multipliers must be a nonempty list of positive integers")
        return v

    def get_absolute_path(self, relative_path: str) -> Path:
        """Convert relative path to absolute path from project root."""
        return self.project_root / relative_path

    def ensure_directories(self) -> None:
        """Create the output directory if it doesn't exist."""
        self.output_path.mkdir(parents=True, exist_ok=True)

    @property
    def output_path(self) -> Path:
        """Get output directory path."""
        return self.get_absolute_path(self.output_dir)


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.
    Uses lru_cache to ensure settings are loaded only once.
    """
    return Settings()
