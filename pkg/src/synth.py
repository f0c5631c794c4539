"""
Synthetic multi-process sensor data with known ground truth.

Every process is a positive mix of a few shared latent drivers (slow
sinusoids plus a smoothed random walk); each sensor observes its process
with its own Gaussian noise level.
"""

from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from .config import Config
from .data import TIME_COLUMN
from .errors import ConfigError
from .logger import get_logger
from .model import Topology

logger = get_logger()

__all__ = [
    "AIR_QUALITY_SCHEMA",
    "generate",
    "schema_topology",
    "air_quality_config",
]

# six pollutants with 5, 3, 3, 2, 2, 1 sensors
AIR_QUALITY_SCHEMA: Dict[str, int] = {
    "NO2": 5,
    "NO": 3,
    "PM10": 3,
    "PM25": 2,
    "CO": 2,
    "O3": 1,
}

DEFAULT_STEPS = 720
N_DRIVERS = 3


def schema_topology(schema: Mapping[str, int]) -> Topology:
    """Sensors named ``{process}_{i}`` counting from 1."""
    if not schema:
        raise ConfigError("sensor schema is empty")
    for process, count in schema.items():
        if count < 1:
            raise ConfigError(f"process '{process}' needs at least one sensor, got {count}")
    return Topology.from_groups(
        {process: [f"{process}_{i}" for i in range(1, count + 1)] for process, count in schema.items()}
    )


def _drivers(n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance latent drivers, shape (N_DRIVERS, n_steps)."""
    t = np.arange(n_steps, dtype=np.float64)
    out = np.empty((N_DRIVERS, n_steps))
    for k in range(N_DRIVERS):
        periods = rng.uniform(12.0, 24.0 * 7, size=2)
        phases = rng.uniform(0.0, 2 * np.pi, size=2)
        wave = np.sin(2 * np.pi * t[None, :] / periods[:, None] + phases[:, None]).sum(axis=0)
        walk = np.cumsum(rng.normal(0.0, 0.05, size=n_steps))
        walk = np.convolve(walk, np.ones(24) / 24, mode="same")
        signal = wave + walk
        out[k] = (signal - signal.mean()) / signal.std()
    return out


def generate(
    schema: Optional[Mapping[str, int]] = None,
    n_steps: int = DEFAULT_STEPS,
    seed: int = 0,
    noise_range: Tuple[float, float] = (0.03, 0.15),
) -> Tuple[pd.DataFrame, Topology]:
    """Clean measurement frame (``t`` + one column per sensor) and its
    topology.

    ``noise_range`` bounds each sensor's noise level relative to the
    standard deviation of its process signal.
    """
    schema = dict(AIR_QUALITY_SCHEMA if schema is None else schema)
    topology = schema_topology(schema)
    if n_steps < 2:
        raise ConfigError(f"n_steps must be at least 2, got {n_steps}")
    rng = np.random.default_rng(seed)

    drivers = _drivers(n_steps, rng)
    mixing = rng.uniform(0.2, 1.0, size=(topology.n_processes, N_DRIVERS))
    levels = rng.uniform(20.0, 80.0, size=topology.n_processes)
    amplitudes = rng.uniform(0.15, 0.3, size=topology.n_processes) * levels

    mixed = mixing @ drivers
    mixed = (mixed - mixed.mean(axis=1, keepdims=True)) / mixed.std(axis=1, keepdims=True)
    processes = levels[:, None] + amplitudes[:, None] * mixed
    # keep every process strictly positive like a concentration
    processes = np.maximum(processes, 0.05 * levels[:, None])

    rel_noise = rng.uniform(*noise_range, size=topology.n_sensors)
    sp = topology.sensor_process
    sigma = rel_noise * processes.std(axis=1)[sp]
    values = processes[sp].T + rng.normal(0.0, 1.0, size=(n_steps, topology.n_sensors)) * sigma

    df = pd.DataFrame(values, columns=list(topology.sensors))
    df.insert(0, TIME_COLUMN, np.arange(n_steps, dtype=np.int64))
    logger.info(
        f"Generated {n_steps} steps for {topology.n_processes} processes / "
        f"{topology.n_sensors} sensors (seed={seed})"
    )
    return df, topology


def air_quality_config(topology: Topology, seed: int = 0, **overrides) -> Config:
    """Hourly air-quality settings: one-week warm-up, five information
    sources per process."""
    total_sources = 5
    sizes = dict(zip(topology.processes, topology.group_sizes().tolist()))
    fields = dict(
        r=0.7,
        n_neighbors=48,
        soft_sensors={p: max(0, total_sources - n) for p, n in sizes.items()},
        gamma={p: 1.0 for p in topology.processes},
        window=72,
        warmup_length=168,
        rng_seed=seed,
    )
    fields.update(overrides)
    return Config(**fields).validate(topology)
