"""
Exception hierarchy shared by the engine, the cleaners and the CLI.
"""

from typing import Optional

__all__ = [
    "RelSenError",
    "ConfigError",
    "TopologyError",
    "DataError",
    "CalibrationError",
    "StreamError",
    "InjectionError",
    "InsufficientHistoryError",
    "FitError",
    "EstimationError",
    "exit_code_for",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class RelSenError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RelSenError, ValueError):
    """Invalid configuration, optionally pinned to a file line."""

    def __init__(
        self, message: str, path: Optional[str] = None, line: Optional[int] = None
    ):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path and self.line:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class TopologyError(ConfigError):
    """Sensor mapped to zero or several processes, or an empty process."""


class DataError(RelSenError, ValueError):
    """Bad measurement data."""


class CalibrationError(DataError):
    """Normalizer cannot be fitted on the given window."""


class StreamError(DataError):
    """Malformed stream: timestamp gap, missing column, non-finite value."""


class InjectionError(DataError):
    """Fault campaign cannot be placed on the series."""


class InsufficientHistoryError(RelSenError, LookupError):
    """Fewer stored points than requested neighbors."""


class FitError(RelSenError, RuntimeError):
    """Local regression received non-finite input."""


class EstimationError(RelSenError, RuntimeError):
    """Closed form or linear system has no unique solution."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME
