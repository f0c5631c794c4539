"""
The online loop: warm-up once, then per incoming frame build soft sensors,
estimate the states and update the scores.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..config import Config, resolve_threads
from ..errors import ConfigError, InsufficientHistoryError, StreamError
from ..logger import get_logger
from ..model import (
    EstimateFrame,
    MeasurementFrame,
    Normalizer,
    Topology,
    fit_normalizer,
    normalize,
)
from .cleaning import estimate_states
from .reliability import ReliabilityState, WindowRecord, update_scores
from .soft_sensor import (
    RESERVOIR_DOMAIN,
    STREAM_DOMAIN,
    ErrorNormalizer,
    HistoryStore,
    SoftSensorRecord,
    build_soft_sensor,
    normalized_error,
    soft_reliability,
    soft_sensor_rng,
)
from .warmup import WarmupProblem, WarmupResult, run_warmup

logger = get_logger()

__all__ = ["EngineState", "StepResult", "RelSenEngine", "bootstrap", "step"]


@dataclass
class EngineState:
    config: Config
    topology: Topology
    normalizer: Normalizer
    history: HistoryStore
    errors: ErrorNormalizer
    reliability: ReliabilityState
    last: EstimateFrame
    warmup: WarmupResult
    first_t: int

    @property
    def scores(self) -> np.ndarray:
        return self.reliability.scores


@dataclass(frozen=True)
class StepResult:
    estimate: EstimateFrame
    scores: np.ndarray
    softs: Tuple[SoftSensorRecord, ...]
    skipped: int = 0


def bootstrap(
    frames: Sequence[MeasurementFrame], config: Config, topology: Topology
) -> EngineState:
    """Fit the normalizer on the T raw warm-up frames, solve the warm-up and
    seed history, error range, scores and window from it."""
    config.validate(topology)
    T = config.warmup_length
    if len(frames) != T:
        raise ConfigError(f"warm-up length T={T} but {len(frames)} frames were given")
    for prev, cur in zip(frames, frames[1:]):
        if cur.t != prev.t + 1:
            raise StreamError(f"warm-up frames not consecutive: t={prev.t} then t={cur.t}")

    normalizer = fit_normalizer([f.check(topology) for f in frames], topology.sensors)
    normed = [normalize(f, normalizer) for f in frames]
    warm = run_warmup(WarmupProblem(normed, topology, config))

    history = HistoryStore(
        config.history_capacity,
        topology.n_sensors,
        topology.n_processes,
        rng=soft_sensor_rng(config.rng_seed, RESERVOIR_DOMAIN),
    )
    for frame, z in zip(normed, warm.states):
        history.add(frame.t, frame.values, z)

    reliability = ReliabilityState(warm.scores, config.window, topology)
    tail = min(config.window + 1, T)
    reliability.extend(
        WindowRecord(t=frame.t, states=z, values=frame.values, softs=softs)
        for frame, z, softs in zip(normed[-tail:], warm.states[-tail:], warm.softs[-tail:])
    )

    return EngineState(
        config=config,
        topology=topology,
        normalizer=normalizer,
        history=history,
        errors=warm.errors.copy(),
        reliability=reliability,
        last=EstimateFrame(t=frames[-1].t, states=warm.states[-1]),
        warmup=warm,
        first_t=frames[0].t,
    )


def _soft_tasks(state: EngineState) -> List[Tuple[int, int]]:
    return [
        (p, m)
        for p, n_soft in enumerate(state.config.m_vector(state.topology))
        for m in range(1, n_soft + 1)
    ]


def step(
    state: EngineState,
    frame: MeasurementFrame,
    executor: Optional[ThreadPoolExecutor] = None,
) -> StepResult:
    """Advance the engine by one raw frame."""
    config, topology = state.config, state.topology
    frame.check(topology)
    if frame.t != state.last.t + 1:
        raise StreamError(f"expected t={state.last.t + 1}, got t={frame.t}")

    normed = normalize(frame, state.normalizer)
    x = normed.values
    offset = frame.t - state.first_t

    def build(task: Tuple[int, int]) -> Optional[SoftSensorRecord]:
        p, m = task
        rng = soft_sensor_rng(config.rng_seed, STREAM_DOMAIN, offset, p, m)
        try:
            return build_soft_sensor(
                state.history, x, topology, p, m, config.r, config.n_neighbors,
                rng, t=frame.t,
            )
        except InsufficientHistoryError as e:
            logger.debug(f"t={frame.t}: skip soft sensor {topology.processes[p]}#{m}: {e}")
            return None

    tasks = _soft_tasks(state)
    mapper = executor.map if executor is not None else map
    built = [r for r in mapper(build, tasks) if r is not None]
    skipped = len(tasks) - len(built)

    state.errors.insert_many(r.fit_error for r in built)
    softs: List[SoftSensorRecord] = []
    for record in built:
        record = record.with_error(normalized_error(record.fit_error, state.errors))
        c = soft_reliability(record, state.scores)
        if c is None:
            logger.debug(
                f"t={frame.t}: drop soft sensor {topology.processes[record.process]}"
                f"#{record.index}: all weights zero"
            )
            skipped += 1
            continue
        softs.append(record.with_reliability(c))

    estimate = estimate_states(
        normed, softs, state.scores, state.last.states,
        config.gamma_vector(topology), topology,
    )
    state.reliability.push(
        WindowRecord(t=frame.t, states=estimate.states, values=x, softs=tuple(softs))
    )
    scores = update_scores(state.reliability).copy()
    state.history.add(frame.t, x, estimate.states)
    state.last = estimate
    return StepResult(estimate=estimate, scores=scores, softs=tuple(softs), skipped=skipped)


class RelSenEngine:
    """One engine per stream; owns the worker pool for the soft-sensor map.

    Usage::

        with RelSenEngine(config, topology) as engine:
            engine.bootstrap(frames[:T])
            for result in engine.run(frames[T:]):
                ...
    """

    def __init__(self, config: Config, topology: Topology, threads: Optional[int] = None):
        self.config = config.validate(topology)
        self.topology = topology
        self.threads = threads if threads is not None else resolve_threads()
        self._executor = (
            ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 else None
        )
        self.state: Optional[EngineState] = None

    def bootstrap(self, frames: Sequence[MeasurementFrame]) -> EngineState:
        self.state = bootstrap(frames, self.config, self.topology)
        return self.state

    def step(self, frame: MeasurementFrame) -> StepResult:
        if self.state is None:
            raise StreamError("engine used before bootstrap")
        return step(self.state, frame, self._executor)

    def run(self, frames: Iterable[MeasurementFrame], log_every: int = 500) -> Iterator[StepResult]:
        for n, frame in enumerate(frames, 1):
            yield self.step(frame)
            if log_every and n % log_every == 0:
                logger.info(f"Processed {n} frames (t={frame.t})")

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "RelSenEngine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
