"""
Base cleaner class and shared step plumbing.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from ..config import Config
from ..errors import CalibrationError, StreamError
from ..logger import get_logger
from ..model import (
    EstimateFrame,
    MeasurementFrame,
    Normalizer,
    Topology,
    fit_normalizer,
    normalize,
)

logger = get_logger()


@dataclass(frozen=True)
class CleanedStep:
    """One emitted (states, scores) pair; ``scores`` is None for methods
    without per-sensor scores."""

    estimate: EstimateFrame
    scores: Optional[np.ndarray] = None

    @property
    def t(self) -> int:
        return self.estimate.t


class CleanerBase(ABC):
    """Base class for all cleaning methods.

    A cleaner is warmed once on the first T raw frames (which fits its
    normalizer) and then fed one raw frame per step. Every output is in
    normalized units. Subclasses implement ``_warm`` and ``_step``; the
    public methods validate the frames and track the stream position.
    """

    has_scores = False

    def __init__(self, name: str, config: Config, topology: Topology):
        self.name = name
        self.config = config
        self.topology = topology
        self.normalizer: Optional[Normalizer] = None
        self.last_t: Optional[int] = None

    def warm(self, frames: Sequence[MeasurementFrame]) -> List[CleanedStep]:
        """Fit on the warm-up ``frames`` and return their cleaned rows."""
        if not frames:
            raise CalibrationError(f"{self.name}: no warm-up frames")
        rows = self._warm([f.check(self.topology) for f in frames])
        self.last_t = frames[-1].t
        return rows

    def step(self, frame: MeasurementFrame) -> CleanedStep:
        if self.last_t is None:
            raise StreamError(f"{self.name}: step called before warm")
        frame.check(self.topology)
        if frame.t != self.last_t + 1:
            raise StreamError(f"{self.name}: expected t={self.last_t + 1}, got t={frame.t}")
        row = self._step(frame)
        self.last_t = frame.t
        return row

    def run(self, frames: Iterable[MeasurementFrame]) -> Iterator[CleanedStep]:
        for frame in frames:
            yield self.step(frame)

    def close(self) -> None:
        """Release worker resources, if any."""

    @abstractmethod
    def _warm(self, frames: Sequence[MeasurementFrame]) -> List[CleanedStep]:
        """Fit ``self.normalizer`` (and any state) on validated raw frames."""

    @abstractmethod
    def _step(self, frame: MeasurementFrame) -> CleanedStep:
        """Clean one validated raw frame."""


class FrameCleaner(CleanerBase):
    """Cleaners that look at one normalized frame at a time."""

    def _warm(self, frames: Sequence[MeasurementFrame]) -> List[CleanedStep]:
        self.normalizer = fit_normalizer(frames, self.topology.sensors)
        return [self._warm_step(normalize(f, self.normalizer)) for f in frames]

    def _step(self, frame: MeasurementFrame) -> CleanedStep:
        return self._clean(normalize(frame, self.normalizer))

    def _warm_step(self, normed: MeasurementFrame) -> CleanedStep:
        return self._clean(normed)

    @abstractmethod
    def _clean(self, normed: MeasurementFrame) -> CleanedStep:
        """Clean one normalized frame."""
