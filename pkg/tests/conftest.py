"""Test configuration."""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models import Graph, GridSpec  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction and scaling checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return GridSpec(delta_min=0.0, delta_max=1.0, step=0.25)


@pytest.fixture
def path5():
    return Graph.from_edges(5, [(i, i + 1) for i in range(4)])


@pytest.fixture
def square():
    """4-cycle 0-1-2-3-0."""
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
