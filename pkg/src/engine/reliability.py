"""
Sliding-window sensor reliability scores.

Scores satisfy ``sum_s exp(-c_s) = 1``. Each update charges every sensor
its squared deviation from its process estimate plus its share of the
soft-sensor errors it explained, then sets ``c_s = -ln(numer_s / total)``.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, Sequence, Tuple

import numpy as np

from ..model import Topology
from .soft_sensor import SoftSensorRecord

__all__ = [
    "WindowRecord",
    "ReliabilityState",
    "g_coefficient",
    "attributed_errors",
    "scores_from_errors",
    "update_scores",
    "uniform_scores",
    "total_errors",
    "SCORE_FLOOR",
]

SCORE_FLOOR = 1e-12
LAMBDA_FLOOR = 1e-300


@dataclass(frozen=True)
class WindowRecord:
    """Everything one timestep contributes to the score update."""

    t: int
    states: np.ndarray
    values: np.ndarray
    softs: Tuple[SoftSensorRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "softs", tuple(self.softs))


def g_coefficient(record: SoftSensorRecord, sensor: int) -> float:
    """Fraction of ``record``'s error attributed to ``sensor``."""
    hits = np.flatnonzero(record.explanatory == sensor)
    if hits.size == 0:
        return 0.0
    return float(record.attribution()[hits[0]])


def attributed_errors(record: WindowRecord, topology: Topology) -> np.ndarray:
    """Per-sensor squared error charged by one timestep."""
    sp = topology.sensor_process
    errors = (record.states[sp] - record.values) ** 2
    for soft in record.softs:
        residual = (record.states[soft.process] - soft.output) ** 2
        np.add.at(errors, soft.explanatory, soft.attribution() * residual)
    return errors


def uniform_scores(n_sensors: int) -> np.ndarray:
    return np.full(n_sensors, np.log(n_sensors), dtype=np.float64)


def scores_from_errors(numer: np.ndarray) -> np.ndarray:
    """Closed-form scores for per-sensor window errors ``numer``.

    Errors are floored at ``SCORE_FLOOR`` times their total and the total
    recomputed, so the constraint holds after flooring. All-zero errors give
    uniform scores.
    """
    numer = np.asarray(numer, dtype=np.float64)
    total = float(numer.sum())
    if total == 0:
        return uniform_scores(numer.size)
    floored = np.maximum(numer, SCORE_FLOOR * total)
    total = max(float(floored.sum()), LAMBDA_FLOOR)
    return -np.log(floored / total)


class ReliabilityState:
    """Current scores plus the last ``window + 1`` timestep records."""

    def __init__(self, scores: np.ndarray, window: int, topology: Topology):
        self.scores = np.asarray(scores, dtype=np.float64).copy()
        self.window: Deque[WindowRecord] = deque(maxlen=window + 1)
        self.topology = topology

    def push(self, record: WindowRecord) -> None:
        if self.window and record.t <= self.window[-1].t:
            raise ValueError(
                f"window records must be time-ordered: t={record.t} after t={self.window[-1].t}"
            )
        self.window.append(record)

    def extend(self, records: Iterable[WindowRecord]) -> None:
        for record in records:
            self.push(record)

    def window_errors(self) -> np.ndarray:
        return total_errors(self.window, self.topology)

    def __len__(self) -> int:
        return len(self.window)


def update_scores(state: ReliabilityState) -> np.ndarray:
    """Recompute scores over the whole window (partial windows included)."""
    state.scores = scores_from_errors(state.window_errors())
    return state.scores


def total_errors(records: Sequence[WindowRecord], topology: Topology) -> np.ndarray:
    numer = np.zeros(topology.n_sensors)
    for record in records:
        numer += attributed_errors(record, topology)
    return numer
