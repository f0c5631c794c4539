"""
RelSen Core Module

Online sensor reliability scoring and data cleaning, the reference cleaners
it is benchmarked against, and the fault-injection benchmark.
"""

__version__ = "1.0.0"
__author__ = "RelSen Team"

from .cleaners import SUPPORTED_METHODS, get_cleaner

__all__ = ["get_cleaner", "SUPPORTED_METHODS"]
