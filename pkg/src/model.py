"""
Core data types: the sensor/process topology, per-timestep frames and the
min-max normalizer fitted on the calibration (warm-up) window.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import CalibrationError, StreamError, TopologyError
from .logger import get_logger

logger = get_logger()

__all__ = [
    "Topology",
    "MeasurementFrame",
    "EstimateFrame",
    "Normalizer",
    "fit_normalizer",
    "normalize",
    "denormalize",
    "frames_to_matrix",
]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Topology:
    """Which process each sensor monitors.

    ``processes`` and ``sensors`` keep their declaration order; every
    vector in the engine is indexed by these positions.
    """

    processes: Tuple[str, ...]
    sensors: Tuple[str, ...]
    assignment: Mapping[str, str]
    sensor_process: np.ndarray = field(init=False, repr=False, compare=False)
    members: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "processes", tuple(self.processes))
        object.__setattr__(self, "sensors", tuple(self.sensors))
        object.__setattr__(self, "assignment", dict(self.assignment))
        self._validate()

        process_pos = {p: i for i, p in enumerate(self.processes)}
        sensor_process = np.array(
            [process_pos[self.assignment[s]] for s in self.sensors], dtype=np.int64
        )
        sensor_process.setflags(write=False)
        members = tuple(
            tuple(int(i) for i in np.flatnonzero(sensor_process == p))
            for p in range(len(self.processes))
        )
        object.__setattr__(self, "sensor_process", sensor_process)
        object.__setattr__(self, "members", members)

    def _validate(self):
        if len(set(self.processes)) != len(self.processes):
            raise TopologyError("duplicate process identifiers")
        if len(set(self.sensors)) != len(self.sensors):
            raise TopologyError("duplicate sensor identifiers")
        unmapped = [s for s in self.sensors if s not in self.assignment]
        if unmapped:
            raise TopologyError(f"sensors mapped to no process: {unmapped}")
        unknown = [s for s in self.assignment if s not in set(self.sensors)]
        if unknown:
            raise TopologyError(f"assignment names unknown sensors: {unknown}")
        known = set(self.processes)
        bad = {s: p for s, p in self.assignment.items() if p not in known}
        if bad:
            raise TopologyError(f"sensors mapped to unknown processes: {bad}")
        used = set(self.assignment.values())
        empty = [p for p in self.processes if p not in used]
        if empty:
            raise TopologyError(f"processes without sensors: {empty}")

    @classmethod
    def from_groups(cls, groups: Mapping[str, Sequence[str]]) -> "Topology":
        """Build from ``{process: [sensor, ...]}``; a sensor listed under two
        processes is rejected."""
        assignment: Dict[str, str] = {}
        sensors: List[str] = []
        for process, group in groups.items():
            if len(group) == 0:
                raise TopologyError(f"process '{process}' has no sensors")
            for sensor in group:
                if sensor in assignment:
                    raise TopologyError(
                        f"sensor '{sensor}' mapped to two processes: "
                        f"'{assignment[sensor]}' and '{process}'"
                    )
                assignment[sensor] = process
                sensors.append(sensor)
        return cls(processes=tuple(groups), sensors=tuple(sensors), assignment=assignment)

    @property
    def n_processes(self) -> int:
        return len(self.processes)

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.sensor_process, minlength=self.n_processes)

    def outside(self, p: int) -> np.ndarray:
        """Sensor indices not monitoring process ``p`` (S minus S_p)."""
        return np.flatnonzero(self.sensor_process != p)

    def groups(self) -> Dict[str, List[str]]:
        return {
            proc: [self.sensors[i] for i in self.members[p]]
            for p, proc in enumerate(self.processes)
        }


@dataclass(frozen=True)
class MeasurementFrame:
    """Raw or normalized measurements of every sensor at timestamp ``t``."""

    t: int
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise StreamError(f"frame t={self.t}: values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise StreamError(f"frame t={self.t}: non-finite measurement")
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "values", values)

    def check(self, topology: Topology) -> "MeasurementFrame":
        if self.values.shape[0] != topology.n_sensors:
            raise StreamError(
                f"frame t={self.t}: {self.values.shape[0]} values for "
                f"{topology.n_sensors} sensors"
            )
        return self


@dataclass(frozen=True)
class EstimateFrame:
    """Estimated process states at timestamp ``t``."""

    t: int
    states: np.ndarray

    def __post_init__(self):
        states = _frozen(self.states)
        if not np.all(np.isfinite(states)):
            raise StreamError(f"estimate t={self.t}: non-finite state")
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "states", states)


@dataclass(frozen=True)
class Normalizer:
    """Per-sensor (min, max) learned once from a calibration window."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.minimum), _frozen(self.maximum)
        if lo.shape != hi.shape:
            raise CalibrationError("min and max vectors differ in length")
        if np.any(hi < lo):
            raise CalibrationError("normalizer max below min")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def degenerate(self) -> np.ndarray:
        """Mask of constant sensors (max == min)."""
        return self.maximum == self.minimum

    @property
    def span(self) -> np.ndarray:
        return np.where(self.degenerate, 1.0, self.maximum - self.minimum)

    def transform(self, values: np.ndarray) -> np.ndarray:
        out = (np.asarray(values, dtype=np.float64) - self.minimum) / self.span
        return np.where(self.degenerate, 0.5, out)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        out = np.asarray(values, dtype=np.float64) * self.span + self.minimum
        return np.where(self.degenerate, self.minimum, out)


def frames_to_matrix(frames: Sequence[MeasurementFrame]) -> np.ndarray:
    return np.vstack([f.values for f in frames])


def fit_normalizer(
    frames: Sequence[MeasurementFrame], sensors: Optional[Sequence[str]] = None
) -> Normalizer:
    """Learn per-sensor extrema over the calibration frames."""
    if len(frames) == 0:
        raise CalibrationError("cannot fit a normalizer on an empty window")
    matrix = frames_to_matrix(frames)
    normalizer = Normalizer(minimum=matrix.min(axis=0), maximum=matrix.max(axis=0))
    if np.any(normalizer.degenerate):
        idx = np.flatnonzero(normalizer.degenerate)
        names = [sensors[i] for i in idx] if sensors is not None else idx.tolist()
        logger.warning(
            f"Constant sensors in calibration window, normalized to 0.5: {names}"
        )
    return normalizer


def normalize(frame: MeasurementFrame, n: Normalizer) -> MeasurementFrame:
    return MeasurementFrame(t=frame.t, values=n.transform(frame.values))


def denormalize(frame: MeasurementFrame, n: Normalizer) -> MeasurementFrame:
    return MeasurementFrame(t=frame.t, values=n.inverse(frame.values))
