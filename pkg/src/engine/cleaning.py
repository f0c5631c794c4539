"""
State estimation: the reliability-weighted mean of hard sensors, soft
sensors and the previous estimate.
"""

from typing import Optional, Sequence

import numpy as np

from ..errors import EstimationError
from ..model import EstimateFrame, MeasurementFrame, Topology
from .soft_sensor import SoftSensorRecord

__all__ = ["estimate_states", "l1_objective", "soft_arrays"]


def soft_arrays(softs: Sequence[SoftSensorRecord]):
    """(process index, reliability, output) columns of a record list."""
    if not softs:
        empty = np.empty(0)
        return empty.astype(np.int64), empty, empty
    proc = np.fromiter((r.process for r in softs), dtype=np.int64, count=len(softs))
    c = np.fromiter((r.reliability for r in softs), dtype=np.float64, count=len(softs))
    y = np.fromiter((r.output for r in softs), dtype=np.float64, count=len(softs))
    return proc, c, y


def estimate_states(
    frame: MeasurementFrame,
    softs: Sequence[SoftSensorRecord],
    scores: np.ndarray,
    z_prev: Optional[np.ndarray],
    gamma: np.ndarray,
    topology: Topology,
) -> EstimateFrame:
    """Closed-form minimizer of the weighted squared distance to every
    information source of each process.

    ``z_prev=None`` drops the smoothness term.
    """
    P = topology.n_processes
    sp = topology.sensor_process
    scores = np.asarray(scores, dtype=np.float64)

    numer = np.bincount(sp, weights=scores * frame.values, minlength=P)
    denom = np.bincount(sp, weights=scores, minlength=P)

    proc, c, y = soft_arrays(softs)
    if proc.size:
        numer += np.bincount(proc, weights=c * y, minlength=P)
        denom += np.bincount(proc, weights=c, minlength=P)

    if z_prev is not None:
        gamma = np.asarray(gamma, dtype=np.float64)
        numer += gamma * np.asarray(z_prev, dtype=np.float64)
        denom += gamma

    dead = np.flatnonzero(denom <= 0)
    if dead.size:
        names = [topology.processes[p] for p in dead]
        raise EstimationError(f"t={frame.t}: no weight on any source of processes {names}")
    return EstimateFrame(t=frame.t, states=numer / denom)


def l1_objective(
    states: np.ndarray,
    frame: MeasurementFrame,
    softs: Sequence[SoftSensorRecord],
    scores: np.ndarray,
    z_prev: Optional[np.ndarray],
    gamma: np.ndarray,
    topology: Topology,
) -> float:
    """Loss minimized by ``estimate_states`` evaluated at ``states``."""
    z = np.asarray(states, dtype=np.float64)
    sp = topology.sensor_process
    loss = float(np.sum(np.asarray(scores) * (z[sp] - frame.values) ** 2))
    proc, c, y = soft_arrays(softs)
    loss += float(np.sum(c * (z[proc] - y) ** 2))
    if z_prev is not None:
        loss += float(np.sum(np.asarray(gamma) * (z - z_prev) ** 2))
    return loss
