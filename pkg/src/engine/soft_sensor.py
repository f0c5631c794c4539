"""
Random local linear regression soft sensors.

A soft sensor for process ``p`` predicts ``z_p`` from a random subset of the
sensors that do not monitor ``p``. Its weights come from a least-squares fit
over the K nearest stored points, so every soft sensor is rebuilt per step.
"""

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.linear_model import LinearRegression, Ridge

from ..errors import ConfigError, FitError, InsufficientHistoryError
from ..logger import get_logger
from ..model import Topology

logger = get_logger()

__all__ = [
    "HistoryStore",
    "SoftSensorRecord",
    "LocalFit",
    "ErrorNormalizer",
    "explanatory_count",
    "select_explanatory",
    "knn",
    "fit_local",
    "evaluate",
    "normalized_error",
    "soft_reliability",
    "build_soft_sensor",
    "refit_soft_sensor",
    "soft_sensor_rng",
]

RIDGE_ALPHA = 1e-8

# spawn-key domains keeping the random streams of each phase apart
WARMUP_DOMAIN = 0
STREAM_DOMAIN = 1
RESERVOIR_DOMAIN = 2


def soft_sensor_rng(seed: int, domain: int, *key: int) -> np.random.Generator:
    """Generator for one (phase, step, process, index) cell, independent of
    the order in which cells are evaluated."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(domain, *key))
    )


class HistoryStore:
    """Fixed-capacity pool of past (t, x, z) triples.

    Rows are kept by reservoir sampling (Algorithm R), so after ``n`` offers
    every offered timestep is stored with probability ``capacity / n``.
    Full vectors are stored; queries project onto their explanatory set.
    """

    def __init__(
        self,
        capacity: int,
        n_sensors: int,
        n_processes: int,
        rng: Optional[np.random.Generator] = None,
    ):
        if capacity < 1:
            raise ConfigError(f"history capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.ts = np.zeros(capacity, dtype=np.int64)
        self.X = np.zeros((capacity, n_sensors), dtype=np.float64)
        self.Z = np.zeros((capacity, n_processes), dtype=np.float64)
        self.size = 0
        self.seen = 0
        self._rng = rng if rng is not None else np.random.default_rng()

    @classmethod
    def from_arrays(
        cls, ts: Sequence[int], X: np.ndarray, Z: np.ndarray
    ) -> "HistoryStore":
        """Store holding exactly the given rows (no sampling)."""
        X = np.asarray(X, dtype=np.float64)
        Z = np.asarray(Z, dtype=np.float64)
        store = cls(len(ts), X.shape[1], Z.shape[1])
        store.ts[:] = ts
        store.X[:] = X
        store.Z[:] = Z
        store.size = store.seen = len(ts)
        return store

    def __len__(self) -> int:
        return self.size

    def add(self, t: int, x: np.ndarray, z: np.ndarray) -> Optional[int]:
        """Offer one row; returns the slot it landed in, or None if dropped."""
        if self.size < self.capacity:
            slot = self.size
            self.size += 1
        else:
            j = int(self._rng.integers(0, self.seen + 1))
            slot = j if j < self.capacity else None
        self.seen += 1
        if slot is not None:
            self.ts[slot] = t
            self.X[slot] = x
            self.Z[slot] = z
        return slot

    def knn(
        self,
        point: np.ndarray,
        explanatory: np.ndarray,
        k: int,
        exclude_t: Optional[int] = None,
    ) -> np.ndarray:
        """Slots of the ``k`` rows closest to ``point`` on the explanatory
        sensors. Equal distances rank the older row first."""
        slots = np.arange(self.size)
        if exclude_t is not None:
            slots = slots[self.ts[slots] != exclude_t]
        if slots.size < k:
            raise InsufficientHistoryError(
                f"{slots.size} stored points, {k} neighbors requested"
            )
        diff = self.X[np.ix_(slots, explanatory)] - np.asarray(point, dtype=np.float64)
        dist = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((self.ts[slots], dist))[:k]
        return slots[order]


def knn(
    history: HistoryStore,
    point: np.ndarray,
    explanatory: np.ndarray,
    k: int,
    exclude_t: Optional[int] = None,
) -> np.ndarray:
    return history.knn(point, explanatory, k, exclude_t)


def explanatory_count(r: float, n_outside: int) -> int:
    # rounding first keeps e.g. 0.7 * 10 from landing on 8
    return max(1, min(n_outside, math.ceil(round(r * n_outside, 9))))


def select_explanatory(
    topology: Topology, p: int, r: float, rng: np.random.Generator
) -> np.ndarray:
    """Uniform random subset of the sensors outside process ``p``, sorted."""
    outside = topology.outside(p)
    if outside.size == 0:
        raise ConfigError(
            f"process '{topology.processes[p]}' has no sensors outside it for soft sensors"
        )
    n = explanatory_count(r, outside.size)
    return np.sort(rng.choice(outside, size=n, replace=False))


@dataclass(frozen=True)
class LocalFit:
    weights: np.ndarray
    bias: float
    fit_error: float


def fit_local(X: np.ndarray, y: np.ndarray) -> LocalFit:
    """Least squares of ``y`` on ``X`` with intercept; ``fit_error`` is the
    residual sum of squares divided by the number of rows."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise FitError(f"cannot fit {y.shape[0]} targets on design {X.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise FitError("non-finite value in local regression input")

    n, d = X.shape
    centered = X - X.mean(axis=0)
    if np.linalg.matrix_rank(centered) < d:
        model = Ridge(alpha=RIDGE_ALPHA, solver="svd")
    else:
        model = LinearRegression()
    model.fit(X, y)

    weights = np.asarray(model.coef_, dtype=np.float64).reshape(d)
    bias = float(model.intercept_)
    residual = y - (X @ weights + bias)
    return LocalFit(weights=weights, bias=bias, fit_error=float(residual @ residual) / n)


@dataclass(frozen=True)
class SoftSensorRecord:
    """One soft sensor built for process ``process`` at step ``t``.

    ``norm_error`` and ``reliability`` are filled in after construction,
    once the step's fitting errors and the current scores are known.
    """

    t: int
    process: int
    index: int
    explanatory: np.ndarray
    weights: np.ndarray
    bias: float
    fit_error: float
    output: float
    neighbors: np.ndarray
    norm_error: float = 0.0
    reliability: float = 0.0

    @property
    def weight_mass(self) -> float:
        return float(np.abs(self.weights).sum())

    def attribution(self) -> np.ndarray:
        """Share of this soft sensor's error charged to each explanatory
        sensor: ``|w_s| / sum|w| * (1 - e)``."""
        mass = self.weight_mass
        if mass == 0:
            return np.zeros_like(self.weights)
        return np.abs(self.weights) / mass * (1.0 - self.norm_error)

    def with_error(self, norm_error: float) -> "SoftSensorRecord":
        return replace(self, norm_error=float(norm_error))

    def with_reliability(self, reliability: float) -> "SoftSensorRecord":
        return replace(self, reliability=float(reliability))


def evaluate(record: SoftSensorRecord, x: np.ndarray) -> float:
    """Soft sensor output ``w . x_explanatory + b``."""
    return float(np.dot(record.weights, np.asarray(x)[record.explanatory]) + record.bias)


class ErrorNormalizer:
    """Running min/max over every fitting error seen so far."""

    def __init__(self):
        self.minimum = math.inf
        self.maximum = -math.inf
        self.count = 0

    def insert(self, error: float) -> None:
        self.minimum = min(self.minimum, error)
        self.maximum = max(self.maximum, error)
        self.count += 1

    def insert_many(self, errors: Iterable[float]) -> None:
        for error in errors:
            self.insert(error)

    def copy(self) -> "ErrorNormalizer":
        other = ErrorNormalizer()
        other.minimum, other.maximum, other.count = self.minimum, self.maximum, self.count
        return other

    def __repr__(self) -> str:
        return f"ErrorNormalizer(min={self.minimum}, max={self.maximum}, n={self.count})"


def normalized_error(error: float, normalizer: ErrorNormalizer) -> float:
    """Min-max position of ``error`` among all errors seen; 0 when they are
    all equal."""
    if normalizer.count == 0:
        raise ValueError("error normalizer has seen no fitting errors")
    spread = normalizer.maximum - normalizer.minimum
    if spread <= 0:
        return 0.0
    return float(np.clip((error - normalizer.minimum) / spread, 0.0, 1.0))


def soft_reliability(record: SoftSensorRecord, scores: np.ndarray) -> Optional[float]:
    """Weighted mean of the explanatory sensors' scores, scaled by ``1 - e``.

    Returns None for an all-zero weight vector; such a soft sensor is
    dropped for the step.
    """
    mass = record.weight_mass
    if mass == 0:
        return None
    c = np.asarray(scores, dtype=np.float64)[record.explanatory]
    return float(np.abs(record.weights) @ c / mass * (1.0 - record.norm_error))


def build_soft_sensor(
    history: HistoryStore,
    x: np.ndarray,
    topology: Topology,
    p: int,
    index: int,
    r: float,
    k: int,
    rng: np.random.Generator,
    t: int,
    exclude_t: Optional[int] = None,
) -> SoftSensorRecord:
    """Select explanatory sensors, find neighbors, fit and evaluate.

    Neighbor targets are the stored estimates of process ``p``.
    """
    explanatory = select_explanatory(topology, p, r, rng)
    slots = history.knn(x[explanatory], explanatory, k, exclude_t)
    fit = fit_local(history.X[np.ix_(slots, explanatory)], history.Z[slots, p])
    record = SoftSensorRecord(
        t=t,
        process=p,
        index=index,
        explanatory=explanatory,
        weights=fit.weights,
        bias=fit.bias,
        fit_error=fit.fit_error,
        output=0.0,
        neighbors=history.ts[slots].copy(),
    )
    return replace(record, output=evaluate(record, x))


def refit_soft_sensor(
    record: SoftSensorRecord, X: np.ndarray, targets: np.ndarray, x: np.ndarray
) -> SoftSensorRecord:
    """Refit on the same neighbor rows with new targets.

    ``X`` and ``targets`` are the neighbor rows already selected by the
    caller; the explanatory set is kept.
    """
    fit = fit_local(X[:, record.explanatory], targets)
    record = replace(record, weights=fit.weights, bias=fit.bias, fit_error=fit.fit_error)
    return replace(record, output=evaluate(record, x))
