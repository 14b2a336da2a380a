"""Configuration module for the tree-PGD toolkit."""

from .config import Settings, get_settings

__all__ = ["Settings", "get_settings"]
