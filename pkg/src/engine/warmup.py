"""
Warm-up: joint estimation of constant scores and the states of the first T
steps by coordinate descent.

Each iteration recomputes the scores for fixed states (closed form) and then
the states for fixed scores, which for every process is one symmetric
tridiagonal system over the T steps.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from ..config import Config
from ..errors import ConfigError, EstimationError, InsufficientHistoryError
from ..logger import get_logger
from ..model import MeasurementFrame, Topology, frames_to_matrix
from .reliability import WindowRecord, attributed_errors, scores_from_errors
from .soft_sensor import (
    WARMUP_DOMAIN,
    ErrorNormalizer,
    HistoryStore,
    SoftSensorRecord,
    build_soft_sensor,
    normalized_error,
    refit_soft_sensor,
    soft_reliability,
    soft_sensor_rng,
)

logger = get_logger()

__all__ = [
    "WarmupProblem",
    "WarmupResult",
    "init_states",
    "solve_states",
    "update_scores_warmup",
    "joint_objective",
    "build_warmup_softs",
    "run_warmup",
]

SoftsByStep = List[Tuple[SoftSensorRecord, ...]]


@dataclass
class WarmupProblem:
    """The first T normalized frames and the settings to solve them with."""

    frames: Sequence[MeasurementFrame]
    topology: Topology
    config: Config

    def __post_init__(self):
        T = len(self.frames)
        if T != self.config.warmup_length:
            raise ConfigError(
                f"warm-up needs T={self.config.warmup_length} frames, got {T}"
            )
        for frame in self.frames:
            frame.check(self.topology)

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([f.t for f in self.frames], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return frames_to_matrix(self.frames)


@dataclass
class WarmupResult:
    scores: np.ndarray
    states: np.ndarray
    timestamps: np.ndarray
    iterations: int
    converged: bool
    objective: List[float] = field(default_factory=list)
    softs: SoftsByStep = field(default_factory=list)
    errors: ErrorNormalizer = field(default_factory=ErrorNormalizer)

    def summary(self, topology: Topology) -> Dict[str, Any]:
        scores = {s: float(c) for s, c in zip(topology.sensors, self.scores)}
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_objective": self.objective[-1] if self.objective else None,
            "objective": self.objective,
            "scores": scores,
            # lowest first: the noisiest sensors of the warm-up span
            "ranked": sorted(scores.items(), key=lambda kv: (kv[1], kv[0])),
        }


def init_states(values: np.ndarray, topology: Topology) -> np.ndarray:
    """Per-process mean of its sensors at every step (T x P)."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    onehot = np.eye(topology.n_processes)[topology.sensor_process]
    return values @ onehot / topology.group_sizes()


def _step_softs(
    softs: Sequence[SoftSensorRecord], n_processes: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-process soft weight and weighted output sum for one step."""
    if not softs:
        return np.zeros(n_processes), np.zeros(n_processes)
    proc = np.array([r.process for r in softs], dtype=np.int64)
    c = np.array([r.reliability for r in softs])
    y = np.array([r.output for r in softs])
    return (
        np.bincount(proc, weights=c, minlength=n_processes),
        np.bincount(proc, weights=c * y, minlength=n_processes),
    )


def solve_states(
    scores: np.ndarray,
    softs: SoftsByStep,
    values: np.ndarray,
    gamma: np.ndarray,
    topology: Topology,
) -> np.ndarray:
    """States minimizing the warm-up loss for fixed scores (T x P).

    ``softs[t]`` must carry reliabilities for the given scores.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    T = values.shape[0]
    P = topology.n_processes
    gamma = np.asarray(gamma, dtype=np.float64)
    onehot = np.eye(P)[topology.sensor_process]

    weight = np.tile(scores @ onehot, (T, 1))
    rhs = (values * scores) @ onehot
    for t in range(T):
        soft_weight, soft_rhs = _step_softs(softs[t] if softs else (), P)
        weight[t] += soft_weight
        rhs[t] += soft_rhs

    states = np.empty((T, P))
    for p in range(P):
        g = gamma[p]
        if (g == 0 and np.any(weight[:, p] <= 0)) or np.all(weight[:, p] <= 0):
            raise EstimationError(
                f"warm-up system for process '{topology.processes[p]}' is singular"
            )
        ab = np.zeros((3, T))
        ab[1] = weight[:, p]
        if T > 1:
            ab[1, 1:] += g
            ab[1, :-1] += g
            ab[0, 1:] = -g
            ab[2, :-1] = -g
        try:
            states[:, p] = solve_banded((1, 1), ab, rhs[:, p])
        except np.linalg.LinAlgError as e:
            raise EstimationError(
                f"warm-up system for process '{topology.processes[p]}': {e}"
            )
    return states


def update_scores_warmup(
    states: np.ndarray, softs: SoftsByStep, values: np.ndarray, topology: Topology
) -> np.ndarray:
    """Constant scores for fixed states, summed over the whole warm-up."""
    numer = np.zeros(topology.n_sensors)
    for t in range(values.shape[0]):
        record = WindowRecord(t=t, states=states[t], values=values[t], softs=softs[t] if softs else ())
        numer += attributed_errors(record, topology)
    return scores_from_errors(numer)


def joint_objective(
    scores: np.ndarray,
    states: np.ndarray,
    softs: SoftsByStep,
    values: np.ndarray,
    gamma: np.ndarray,
    topology: Topology,
) -> float:
    """Warm-up loss: weighted source errors plus the smoothness penalty."""
    numer = np.zeros(topology.n_sensors)
    for t in range(values.shape[0]):
        record = WindowRecord(t=t, states=states[t], values=values[t], softs=softs[t] if softs else ())
        numer += attributed_errors(record, topology)
    smooth = np.sum(np.asarray(gamma) * np.sum(np.diff(states, axis=0) ** 2, axis=0))
    return float(scores @ numer + smooth)


def _with_reliability(softs: SoftsByStep, scores: np.ndarray) -> SoftsByStep:
    out: SoftsByStep = []
    for step in softs:
        kept = []
        for record in step:
            c = soft_reliability(record, scores)
            if c is not None:
                kept.append(record.with_reliability(c))
        out.append(tuple(kept))
    return out


def _normalize_errors(raw: List[List[SoftSensorRecord]]) -> Tuple[SoftsByStep, ErrorNormalizer]:
    """Attach normalized errors step by step: each step's errors are
    inserted before any of them is normalized."""
    errors = ErrorNormalizer()
    out: SoftsByStep = []
    for step in raw:
        errors.insert_many(r.fit_error for r in step)
        out.append(tuple(r.with_error(normalized_error(r.fit_error, errors)) for r in step))
    return out, errors


def build_warmup_softs(
    problem: WarmupProblem, states: np.ndarray
) -> Tuple[SoftsByStep, ErrorNormalizer]:
    """Soft sensors for every (t, p, m) of the warm-up.

    Neighbors come from all warm-up steps except the query step; targets
    are ``states``.
    """
    config, topology = problem.config, problem.topology
    ts = problem.timestamps
    values = problem.values
    pool = HistoryStore.from_arrays(ts, values, states)
    m_vector = config.m_vector(topology)

    raw: List[List[SoftSensorRecord]] = []
    for i, t in enumerate(ts):
        step = []
        for p, n_soft in enumerate(m_vector):
            for m in range(1, n_soft + 1):
                rng = soft_sensor_rng(config.rng_seed, WARMUP_DOMAIN, i, p, m)
                try:
                    record = build_soft_sensor(
                        pool, values[i], topology, p, m, config.r,
                        config.n_neighbors, rng, t=int(t), exclude_t=int(t),
                    )
                except InsufficientHistoryError as e:
                    logger.debug(f"warm-up t={t}: skip soft sensor {topology.processes[p]}#{m}: {e}")
                    continue
                step.append(record)
        raw.append(step)
    return _normalize_errors(raw)


def _refit(
    softs: SoftsByStep, values: np.ndarray, states: np.ndarray, t0: int
) -> Tuple[SoftsByStep, ErrorNormalizer]:
    raw = []
    for i, step in enumerate(softs):
        refit = []
        for record in step:
            rows = record.neighbors - t0
            refit.append(
                refit_soft_sensor(record, values[rows], states[rows, record.process], values[i])
            )
        raw.append(refit)
    return _normalize_errors(raw)


def run_warmup(problem: WarmupProblem) -> WarmupResult:
    """Coordinate descent from the per-process means until the mean state
    change per step falls below epsilon or the iteration cap is hit."""
    config, topology = problem.config, problem.topology
    values = problem.values
    ts = problem.timestamps
    gamma = config.gamma_vector(topology)
    T = values.shape[0]

    states = init_states(values, topology)
    softs, errors = build_warmup_softs(problem, states)
    n_softs = sum(len(step) for step in softs)
    logger.info(
        f"Warm-up: T={T}, {topology.n_sensors} sensors, {n_softs} soft sensors built"
    )

    objective: List[float] = []
    scores = np.zeros(topology.n_sensors)
    weighted: SoftsByStep = softs
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        if config.warmup_refit and iteration > 1:
            softs, errors = _refit(softs, values, states, int(ts[0]))
        scores = update_scores_warmup(states, softs, values, topology)
        weighted = _with_reliability(softs, scores)
        new_states = solve_states(scores, weighted, values, gamma, topology)
        change = float(np.mean(np.linalg.norm(new_states - states, axis=1)))
        states = new_states
        objective.append(joint_objective(scores, states, weighted, values, gamma, topology))
        logger.debug(
            f"warm-up iteration {iteration}: objective={objective[-1]:.6g}, change={change:.3g}"
        )
        if change < config.epsilon:
            converged = True
            break

    if converged:
        logger.info(f"Warm-up converged after {iteration} iterations")
    else:
        logger.warning(
            f"Warm-up stopped at the iteration cap ({config.max_iterations}) "
            f"without reaching epsilon={config.epsilon}"
        )
    return WarmupResult(
        scores=scores,
        states=states,
        timestamps=ts,
        iterations=iteration,
        converged=converged,
        objective=objective,
        softs=_with_reliability(softs, scores),
        errors=errors,
    )
