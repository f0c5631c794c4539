"""
MEDIAN cleaner.
"""

import numpy as np

from ..model import EstimateFrame, MeasurementFrame, Topology
from .base_cleaner import CleanedStep, FrameCleaner


def median_clean(frame: MeasurementFrame, topology: Topology) -> EstimateFrame:
    """Median of each process's sensors (mean of the middle pair for even
    counts)."""
    x = frame.values
    states = np.array([np.median(x[list(idx)]) for idx in topology.members])
    return EstimateFrame(t=frame.t, states=states)


class MedianCleaner(FrameCleaner):
    def __init__(self, config, topology):
        super().__init__("median", config, topology)

    def _clean(self, normed: MeasurementFrame) -> CleanedStep:
        return CleanedStep(median_clean(normed, self.topology))
