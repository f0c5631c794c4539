from typing import List, Sequence

from ..config import Config
from ..logger import get_logger
from ..model import MeasurementFrame, Topology
from .base_cleaner import CleanedStep, CleanerBase
from .imc_cleaner import ImcCleaner
from .mean_cleaner import MeanCleaner
from .median_cleaner import MedianCleaner
from .relsen_cleaner import RelSenCleaner

logger = get_logger()

# Mapping from method ids to cleaner classes
NAME_TO_CLEANER_CLASS = {
    "relsen": RelSenCleaner,
    "median": MedianCleaner,
    "mean": MeanCleaner,
    "imc": ImcCleaner,
}

SUPPORTED_METHODS = list(NAME_TO_CLEANER_CLASS.keys())

# methods whose behaviour depends on the window length l
WINDOWED_METHODS = ("relsen", "imc")


def get_cleaner(name: str, config: Config, topology: Topology, **kwargs) -> CleanerBase:
    """Get the cleaner for a method id."""
    if name not in NAME_TO_CLEANER_CLASS:
        raise ValueError(f"Unknown method: {name}")
    return NAME_TO_CLEANER_CLASS[name](config, topology, **kwargs)


def run_cleaner(
    cleaner: CleanerBase, frames: Sequence[MeasurementFrame], warmup_length: int
) -> List[CleanedStep]:
    """Warm on the first ``warmup_length`` frames and stream the rest.

    Returns one CleanedStep per input frame, warm-up rows included.
    """
    try:
        out = cleaner.warm(frames[:warmup_length])
        out.extend(cleaner.run(frames[warmup_length:]))
    finally:
        cleaner.close()
    logger.debug(f"{cleaner.name}: cleaned {len(out)} frames")
    return out
