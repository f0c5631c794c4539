"""
RelSen as a cleaner: warm-up solve, then the online engine.
"""

from typing import List, Optional, Sequence

from ..engine import RelSenEngine
from ..engine.warmup import WarmupResult
from ..model import EstimateFrame, MeasurementFrame
from .base_cleaner import CleanedStep, CleanerBase


class RelSenCleaner(CleanerBase):
    has_scores = True

    def __init__(self, config, topology, window: int = None, threads: Optional[int] = None):
        if window is not None:
            config = config.with_overrides(window=window)
        super().__init__("relsen", config, topology)
        self.engine = RelSenEngine(config, topology, threads=threads)

    @property
    def warmup(self) -> Optional[WarmupResult]:
        return self.engine.state.warmup if self.engine.state else None

    def _warm(self, frames: Sequence[MeasurementFrame]) -> List[CleanedStep]:
        # the engine fits its own normalizer on the raw frames
        state = self.engine.bootstrap(frames)
        self.normalizer = state.normalizer
        warm = state.warmup
        return [
            CleanedStep(EstimateFrame(t=int(t), states=z), warm.scores.copy())
            for t, z in zip(warm.timestamps, warm.states)
        ]

    def _step(self, frame: MeasurementFrame) -> CleanedStep:
        result = self.engine.step(frame)
        return CleanedStep(result.estimate, result.scores)

    def close(self) -> None:
        self.engine.close()
