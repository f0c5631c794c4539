"""
Pytest configuration file for the RelSen project
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path so ``src`` imports as a package
root_path = str(Path(__file__).parent.parent)
if root_path not in sys.path:
    sys.path.insert(0, root_path)

from src.model import MeasurementFrame, Topology  # noqa: E402


# Configure pytest
def pytest_configure(config):
    """Configure pytest"""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")


def pytest_collection_modifyitems(config, items):
    """Modify test collection"""
    for item in items:
        # Mark integration tests
        if "integration" in item.name.lower() or "pipeline" in item.name.lower():
            item.add_marker(pytest.mark.integration)

        # Mark slow tests
        if "slow" in item.name.lower():
            item.add_marker(pytest.mark.slow)


@pytest.fixture
def small_topology():
    """Three processes with 2, 2 and 1 sensors."""
    return Topology.from_groups({"A": ["a1", "a2"], "B": ["b1", "b2"], "C": ["c1"]})


@pytest.fixture
def small_frames(small_topology):
    """60 correlated frames over ``small_topology`` (raw units, t = 0..59)."""
    rng = np.random.default_rng(7)
    t = np.arange(60, dtype=np.float64)
    base = np.vstack(
        [
            10 + 3 * np.sin(t / 5),
            20 + 5 * np.cos(t / 7),
            5 + 2 * np.sin(t / 5 + 1),
        ]
    )
    idx = small_topology.sensor_process
    values = base[idx] + rng.normal(0, 0.1, size=(small_topology.n_sensors, t.size))
    return [MeasurementFrame(t=int(k), values=values[:, k]) for k in range(t.size)]
