"""
MEAN cleaner.
"""

import numpy as np

from ..model import EstimateFrame, MeasurementFrame, Topology
from .base_cleaner import CleanedStep, FrameCleaner


def mean_clean(frame: MeasurementFrame, topology: Topology) -> EstimateFrame:
    sums = np.bincount(
        topology.sensor_process, weights=frame.values, minlength=topology.n_processes
    )
    return EstimateFrame(t=frame.t, states=sums / topology.group_sizes())


class MeanCleaner(FrameCleaner):
    def __init__(self, config, topology):
        super().__init__("mean", config, topology)

    def _clean(self, normed: MeasurementFrame) -> CleanedStep:
        return CleanedStep(mean_clean(normed, self.topology))
