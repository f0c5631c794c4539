"""
Cleaning methods behind one interface: RelSen and the reference baselines.
"""

from .base_cleaner import CleanedStep, CleanerBase, FrameCleaner
from .cleaner_functions import (
    NAME_TO_CLEANER_CLASS,
    SUPPORTED_METHODS,
    WINDOWED_METHODS,
    get_cleaner,
    run_cleaner,
)
from .imc_cleaner import ImcCleaner, ImcState, imc_step
from .mean_cleaner import MeanCleaner, mean_clean
from .median_cleaner import MedianCleaner, median_clean
from .relsen_cleaner import RelSenCleaner

__all__ = [
    "CleanedStep",
    "CleanerBase",
    "FrameCleaner",
    "NAME_TO_CLEANER_CLASS",
    "SUPPORTED_METHODS",
    "WINDOWED_METHODS",
    "get_cleaner",
    "run_cleaner",
    "ImcCleaner",
    "ImcState",
    "imc_step",
    "MeanCleaner",
    "mean_clean",
    "MedianCleaner",
    "median_clean",
    "RelSenCleaner",
]
