"""
IMC cleaner: each sensor's score is the fraction of its last ``l``
measurements that were within ``tol`` of the weighted-mean estimate.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..logger import get_logger
from ..model import EstimateFrame, MeasurementFrame, Topology
from .base_cleaner import CleanedStep, FrameCleaner
from .mean_cleaner import mean_clean

logger = get_logger()


@dataclass
class ImcState:
    tol: float
    window: int
    n_sensors: int
    bits: np.ndarray = field(init=False)
    position: int = field(init=False, default=0)

    def __post_init__(self):
        # every sensor starts fully trusted
        self.bits = np.ones((self.window, self.n_sensors))

    @property
    def scores(self) -> np.ndarray:
        return self.bits.mean(axis=0)

    def push(self, consistent: np.ndarray) -> None:
        self.bits[self.position] = consistent
        self.position = (self.position + 1) % self.window


def imc_step(
    state: ImcState, frame: MeasurementFrame, topology: Topology
) -> Tuple[EstimateFrame, np.ndarray]:
    """Estimate with the current scores, then record which sensors agreed
    with that estimate."""
    x = frame.values
    scores = state.scores
    states = np.empty(topology.n_processes)
    for p, idx in enumerate(topology.members):
        idx = list(idx)
        weights = scores[idx]
        if len(idx) == 1:
            states[p] = x[idx[0]]
        elif weights.sum() == 0:
            logger.debug(f"t={frame.t}: all IMC scores zero for {topology.processes[p]}, using mean")
            states[p] = x[idx].mean()
        else:
            states[p] = weights @ x[idx] / weights.sum()

    consistent = np.abs(x - states[topology.sensor_process]) <= state.tol
    state.push(consistent.astype(np.float64))
    return EstimateFrame(t=frame.t, states=states), state.scores


class ImcCleaner(FrameCleaner):
    has_scores = True

    def __init__(self, config, topology, window: int = None):
        super().__init__("imc", config, topology)
        self.window = window if window is not None else config.window
        self.state = ImcState(config.imc_tol, self.window, topology.n_sensors)

    def _warm_step(self, normed: MeasurementFrame) -> CleanedStep:
        return CleanedStep(mean_clean(normed, self.topology), np.ones(self.topology.n_sensors))

    def _clean(self, normed: MeasurementFrame) -> CleanedStep:
        estimate, scores = imc_step(self.state, normed, self.topology)
        return CleanedStep(estimate, scores)
