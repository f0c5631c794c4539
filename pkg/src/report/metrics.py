"""
Evaluation metrics for cleaned process states.
"""

from typing import Dict, List, Sequence

import numpy as np

from ..model import EstimateFrame, MeasurementFrame, Normalizer, Topology, normalize


def ground_truth(
    clean_frames: Sequence[MeasurementFrame], topology: Topology, normalizer: Normalizer
) -> List[EstimateFrame]:
    """
    Reference states: per-process mean of the normalized pre-injection
    measurements.

    Args:
        clean_frames: Raw frames before fault injection
        topology: Sensor to process mapping
        normalizer: The normalizer the cleaners were warmed with

    Returns:
        List[EstimateFrame]: One truth frame per input frame
    """
    sizes = topology.group_sizes()
    out = []
    for frame in clean_frames:
        x = normalize(frame, normalizer).values
        sums = np.bincount(topology.sensor_process, weights=x, minlength=topology.n_processes)
        out.append(EstimateFrame(t=frame.t, states=sums / sizes))
    return out


def _check_aligned(a: Sequence[EstimateFrame], b: Sequence[EstimateFrame]) -> None:
    if len(a) != len(b):
        raise ValueError(f"series differ in length: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x.t != y.t:
            raise ValueError(f"series not aligned: t={x.t} vs t={y.t}")


def abs_error(
    cleaned: Sequence[EstimateFrame], truth: Sequence[EstimateFrame]
) -> np.ndarray:
    """|z - truth| per step and process, shape (N, P)."""
    _check_aligned(cleaned, truth)
    if not cleaned:
        return np.empty((0, 0))
    return np.abs(np.vstack([c.states for c in cleaned]) - np.vstack([t.states for t in truth]))


def mae(cleaned: Sequence[EstimateFrame], truth: Sequence[EstimateFrame], p: int) -> float:
    """
    Mean absolute error of process ``p`` over the given (aligned) frames.

    Returns:
        float: MAE, 0 for empty series
    """
    errors = abs_error(cleaned, truth)
    if errors.size == 0:
        return 0.0
    return float(errors[:, p].mean())


def mae_by_process(
    cleaned: Sequence[EstimateFrame],
    truth: Sequence[EstimateFrame],
    topology: Topology,
) -> Dict[str, float]:
    return {proc: mae(cleaned, truth, p) for p, proc in enumerate(topology.processes)}


def average_mae(per_process: Dict[str, float]) -> float:
    """Unweighted mean over processes."""
    if not per_process:
        return 0.0
    return float(np.mean(list(per_process.values())))
