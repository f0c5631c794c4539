"""
Measurement stream I/O: CSV loading with stream checks, conversion to
frames, and whole-frame or row-at-a-time CSV writers.
"""

import csv
from typing import IO, List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import StreamError
from .logger import get_logger
from .model import MeasurementFrame, Topology

logger = get_logger()

__all__ = [
    "read_stream",
    "frames_from_frame",
    "check_consecutive",
    "CsvStreamWriter",
    "write_frames",
]

TIME_COLUMN = "t"


def read_stream(file_path: str, topology: Optional[Topology] = None) -> pd.DataFrame:
    """Load a measurement CSV (first column ``t``, one column per sensor).

    With a topology, columns are reordered to the topology's sensor order and
    missing sensors are reported by name.
    """
    try:
        df = pd.read_csv(file_path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise StreamError(f"cannot parse {file_path}: {e}")

    if df.columns.empty or df.columns[0] != TIME_COLUMN:
        raise StreamError(f"{file_path}: first column must be '{TIME_COLUMN}'")

    if topology is not None:
        missing = [s for s in topology.sensors if s not in df.columns]
        if missing:
            raise StreamError(f"{file_path}: missing sensor columns {missing}")
        extra = [c for c in df.columns[1:] if c not in set(topology.sensors)]
        if extra:
            logger.warning(f"Ignoring columns not in topology: {extra}")
        df = df[[TIME_COLUMN, *topology.sensors]]

    values = df.iloc[:, 1:]
    numeric = values.apply(pd.to_numeric, errors="coerce")
    non_finite = ~np.isfinite(numeric.to_numpy(dtype=np.float64))
    if non_finite.any():
        row, col = np.argwhere(non_finite)[0]
        raise StreamError(
            f"{file_path}: non-finite value for sensor '{values.columns[col]}' "
            f"at row {row + 2}"
        )
    try:
        ts = df[[TIME_COLUMN]].astype(np.int64)
    except (TypeError, ValueError):
        raise StreamError(f"{file_path}: column '{TIME_COLUMN}' must hold integers")
    df = pd.concat([ts, numeric.astype(np.float64)], axis=1)
    check_consecutive(df[TIME_COLUMN].to_numpy())

    logger.info(
        f"Successfully \033[34mloaded {len(df)} rows\033[0m from \033[31m{file_path}\033[0m"
    )
    return df


def check_consecutive(timestamps: Sequence[int]) -> None:
    ts = np.asarray(timestamps, dtype=np.int64)
    if ts.size < 2:
        return
    gaps = np.flatnonzero(np.diff(ts) != 1)
    if gaps.size:
        i = int(gaps[0])
        raise StreamError(
            f"timestamps must be consecutive integers: t={ts[i]} followed by t={ts[i + 1]}"
        )


def frames_from_frame(df: pd.DataFrame) -> List[MeasurementFrame]:
    ts = df[TIME_COLUMN].to_numpy(dtype=np.int64)
    values = df.drop(columns=[TIME_COLUMN]).to_numpy(dtype=np.float64)
    return [MeasurementFrame(t=int(t), values=row) for t, row in zip(ts, values)]


def write_frames(df: pd.DataFrame, file_path: str) -> None:
    df.to_csv(file_path, index=False, float_format="%.12g")
    logger.info(f"Successfully saved {len(df)} rows to \033[31m{file_path}\033[0m")


class CsvStreamWriter:
    """Row-at-a-time CSV writer flushed after every step."""

    def __init__(self, file_path: str, columns: Sequence[str]):
        self.file_path = file_path
        self._fh: IO[str] = open(file_path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow([TIME_COLUMN, *columns])
        self.rows = 0

    def write(self, t: int, values: Sequence[float]) -> None:
        self._writer.writerow([t, *(f"{v:.10g}" for v in values)])
        self._fh.flush()
        self.rows += 1

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()
            logger.info(f"Successfully saved {self.rows} rows to \033[31m{self.file_path}\033[0m")

    def __enter__(self) -> "CsvStreamWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
