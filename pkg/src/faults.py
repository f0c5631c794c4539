"""
Fault injection for benchmarking: SHORT spikes, NOISE segments and
CONSTANT offset segments, applied after the warm-up span.
"""

import json
import math
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import JsonSection
from .data import TIME_COLUMN
from .errors import ConfigError, InjectionError
from .logger import get_logger
from .model import Topology

logger = get_logger()

__all__ = [
    "FaultKind",
    "FaultSpec",
    "FaultCampaign",
    "schedule_segments",
    "sensor_sigma",
    "inject_short",
    "inject_noise",
    "inject_constant",
    "inject",
    "staged_campaign",
    "apply_campaign",
    "one_per_process",
    "load_fault_spec",
    "STAGED_INTENSITIES",
]

STAGED_INTENSITIES = (0.75, 1.5, 3.0)

SeedLike = Union[int, np.random.SeedSequence]


class FaultKind(str, Enum):
    SHORT = "SHORT"
    NOISE = "NOISE"
    CONSTANT = "CONSTANT"


@dataclass(frozen=True)
class FaultSpec:
    """One fault process on one sensor."""

    kind: FaultKind
    target: str
    intensity: float = 1.0
    short_rate: float = 0.05
    duration_range: Tuple[int, int] = (10, 50)
    gap: int = 24
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", FaultKind(self.kind))
        object.__setattr__(self, "duration_range", tuple(int(d) for d in self.duration_range))
        if not (math.isfinite(self.intensity) and self.intensity >= 0):
            raise ConfigError(f"fault intensity must be finite and >= 0, got {self.intensity}")
        if not 0 < self.short_rate <= 1:
            raise ConfigError(f"short_rate must lie in (0, 1], got {self.short_rate}")
        lo, hi = self.duration_range
        if not 1 <= lo <= hi:
            raise ConfigError(f"duration_range must satisfy 1 <= min <= max, got {self.duration_range}")
        if self.gap < 0:
            raise ConfigError(f"gap must be >= 0, got {self.gap}")


def _streams(seed: SeedLike) -> Tuple[np.random.Generator, np.random.Generator]:
    """(schedule, values) generators; the schedule stream does not depend on
    the fault kind."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    schedule, values = ss.spawn(2)
    return np.random.default_rng(schedule), np.random.default_rng(values)


def sensor_sigma(series: np.ndarray) -> float:
    """Sample standard deviation of the clean series."""
    series = np.asarray(series, dtype=np.float64)
    return float(np.std(series, ddof=1)) if series.size > 1 else 0.0


def schedule_segments(
    n: int, duration_range: Tuple[int, int], gap: int, rng: np.random.Generator
) -> List[Tuple[int, int]]:
    """Greedy left-to-right ``[start, stop)`` segments.

    Durations are drawn from ``duration_range`` (capped by what is left of
    the series) and consecutive segments are ``gap`` points apart.
    """
    lo, hi = duration_range
    if n < lo:
        raise InjectionError(f"series of {n} points is shorter than one segment ({lo})")
    segments = []
    pos = 0
    while n - pos >= lo:
        d = int(rng.integers(lo, min(hi, n - pos) + 1))
        segments.append((pos, pos + d))
        pos += d + gap
    return segments


def _segment_mask(n: int, segments: Sequence[Tuple[int, int]]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for start, stop in segments:
        mask[start:stop] = True
    return mask


def _changed(x: np.ndarray, out: np.ndarray, mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # points left equal by the fault (f=0, x=0 spikes) are not reported
    return out, mask & (out != x)


def _short(x, spec, f, sigma, seed):
    schedule_rng, _ = _streams(seed)
    n_points = int(math.floor(spec.short_rate * x.size + 0.5))
    picked = schedule_rng.choice(x.size, size=n_points, replace=False)
    mask = np.zeros(x.size, dtype=bool)
    mask[picked] = True
    out = x.copy()
    out[mask] = x[mask] + f[mask] * x[mask]
    return _changed(x, out, mask)


def _noise(x, spec, f, sigma, seed):
    schedule_rng, value_rng = _streams(seed)
    mask = _segment_mask(x.size, schedule_segments(x.size, spec.duration_range, spec.gap, schedule_rng))
    out = x.copy()
    out[mask] = x[mask] + value_rng.normal(0.0, np.sqrt(f[mask]) * sigma)
    return _changed(x, out, mask)


def _constant(x, spec, f, sigma, seed):
    schedule_rng, _ = _streams(seed)
    mask = _segment_mask(x.size, schedule_segments(x.size, spec.duration_range, spec.gap, schedule_rng))
    out = x.copy()
    out[mask] = x[mask] + f[mask] * sigma
    return _changed(x, out, mask)


_INJECTORS = {
    FaultKind.SHORT: _short,
    FaultKind.NOISE: _noise,
    FaultKind.CONSTANT: _constant,
}


def inject(
    series: np.ndarray,
    spec: FaultSpec,
    sigma: Optional[float] = None,
    seed: Optional[SeedLike] = None,
    intensity: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Apply ``spec`` to ``series``.

    ``intensity`` optionally gives a per-point f (staged campaigns); it
    defaults to ``spec.intensity`` everywhere. The mask marks exactly the
    points whose value changed.
    """
    x = np.asarray(series, dtype=np.float64)
    sigma = sensor_sigma(x) if sigma is None else sigma
    f = np.broadcast_to(
        np.asarray(spec.intensity if intensity is None else intensity, dtype=np.float64), x.shape
    )
    return _INJECTORS[spec.kind](x, spec, f, sigma, spec.seed if seed is None else seed)


def inject_short(
    series: np.ndarray, spec: FaultSpec, sigma: Optional[float] = None,
    seed: Optional[SeedLike] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Spike ``round(rate * N)`` random points: ``x + f * x``."""
    return inject(series, replace(spec, kind=FaultKind.SHORT), sigma, seed)


def inject_noise(
    series: np.ndarray, spec: FaultSpec, sigma: Optional[float] = None,
    seed: Optional[SeedLike] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Add ``N(0, f * sigma^2)`` on scheduled segments."""
    return inject(series, replace(spec, kind=FaultKind.NOISE), sigma, seed)


def inject_constant(
    series: np.ndarray, spec: FaultSpec, sigma: Optional[float] = None,
    seed: Optional[SeedLike] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Add ``f * sigma`` on scheduled segments."""
    return inject(series, replace(spec, kind=FaultKind.CONSTANT), sigma, seed)


@dataclass(frozen=True)
class FaultCampaign:
    """Faults applied together after the warm-up span.

    With ``stages`` the post-warm-up span is split into equal thirds (or as
    many parts as stages) and each part uses its stage intensity; without,
    every spec keeps its own intensity over the whole span.
    """

    faults: Tuple[FaultSpec, ...]
    warmup_length: int
    stages: Optional[Tuple[float, ...]] = STAGED_INTENSITIES
    name: str = "campaign"

    def __post_init__(self):
        object.__setattr__(self, "faults", tuple(self.faults))
        if self.stages is not None:
            object.__setattr__(self, "stages", tuple(float(f) for f in self.stages))
            if not self.stages or any(not (math.isfinite(f) and f >= 0) for f in self.stages):
                raise ConfigError(f"stage intensities must be finite and >= 0: {self.stages}")
        if self.warmup_length < 0:
            raise ConfigError("warmup_length must be >= 0")
        targets = [f.target for f in self.faults]
        doubled = sorted({s for s in targets if targets.count(s) > 1})
        if doubled:
            raise ConfigError(f"one fault kind per sensor: {doubled} listed more than once")

    @property
    def kinds(self) -> List[str]:
        return sorted({f.kind.value for f in self.faults})


def staged_campaign(
    series: np.ndarray,
    spec: FaultSpec,
    stages: Optional[Sequence[float]],
    warmup_length: int,
    sigma: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Inject ``spec`` into the post-warm-up part of ``series``.

    Segments (or spike points) are placed once over the whole post-warm-up
    span, so duration and gap hold across stage boundaries; each point then
    takes the intensity of the stage it falls in. ``sigma`` defaults to the
    standard deviation of the full clean series. The warm-up part is
    returned unchanged.
    """
    x = np.asarray(series, dtype=np.float64)
    sigma = sensor_sigma(x) if sigma is None else sigma
    out, mask = x.copy(), np.zeros(x.size, dtype=bool)
    post = x[warmup_length:]
    if post.size == 0:
        raise InjectionError(f"no data after the warm-up span of {warmup_length} points")

    f = np.full(post.size, spec.intensity)
    if stages:
        for idx, stage in zip(np.array_split(np.arange(post.size), len(stages)), stages):
            f[idx] = stage
    out[warmup_length:], mask[warmup_length:] = inject(post, spec, sigma, intensity=f)
    return out, mask


def apply_campaign(
    clean: pd.DataFrame, campaign: FaultCampaign
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Faulted copy of ``clean`` and a 0/1 mask frame of the same shape."""
    faulted = clean.copy()
    mask = clean.copy()
    sensors = [c for c in clean.columns if c != TIME_COLUMN]
    mask[sensors] = 0
    for spec in campaign.faults:
        if spec.target not in sensors:
            raise ConfigError(f"fault target '{spec.target}' is not a column of the data")
        series, m = staged_campaign(
            clean[spec.target].to_numpy(dtype=np.float64),
            spec,
            campaign.stages,
            campaign.warmup_length,
        )
        faulted[spec.target] = series
        mask[spec.target] = m.astype(np.int64)
        logger.debug(f"{spec.kind.value} on {spec.target}: {int(m.sum())} points")
    mask[sensors] = mask[sensors].astype(np.int64)
    logger.info(
        f"Injected {len(campaign.faults)} faults ({', '.join(campaign.kinds)}), "
        f"{int(mask[sensors].to_numpy().sum())} points contaminated"
    )
    return faulted, mask


def one_per_process(
    topology: Topology,
    kind: FaultKind,
    warmup_length: int,
    seed: int = 0,
    stages: Optional[Sequence[float]] = STAGED_INTENSITIES,
    **spec_fields,
) -> FaultCampaign:
    """The first sensor of every process gets a fault of ``kind``."""
    faults = tuple(
        FaultSpec(
            kind=kind,
            target=topology.sensors[members[0]],
            seed=int(np.random.SeedSequence(seed, spawn_key=(p,)).generate_state(1)[0]),
            **spec_fields,
        )
        for p, members in enumerate(topology.members)
    )
    return FaultCampaign(
        faults=faults,
        warmup_length=warmup_length,
        stages=tuple(stages) if stages else None,
        name=FaultKind(kind).value,
    )


def load_fault_spec(path: str, default_seed: int = 0) -> FaultCampaign:
    """Read a fault campaign file.

    ``defaults`` fill in fields missing from individual ``faults`` entries;
    ``"stages": null`` selects a single-intensity campaign.
    """
    if not os.path.exists(path):
        raise ConfigError("fault spec file not found", path=path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", path, e.lineno)
    if not isinstance(raw, dict):
        raise ConfigError("fault spec root must be an object", path, 1)

    root = JsonSection(raw, text, path, "")
    defaults = root.child("defaults")
    seed = root.get("seed", int, default=default_seed)
    warmup_length = root.get("warmup_length", int, required=True)
    stages = raw.get("stages", list(STAGED_INTENSITIES))
    if stages is not None and not isinstance(stages, list):
        raise root.error("stages", "'stages' must be a list of intensities or null")

    base = {
        "intensity": defaults.get("intensity", float, default=1.0),
        "short_rate": defaults.get("short_rate", float, default=0.05),
        "duration_range": defaults.get("duration_range", list, default=[10, 50]),
        "gap": defaults.get("gap", int, default=24),
    }
    faults = []
    for i, entry in enumerate(root.get("faults", list, required=True)):
        if not isinstance(entry, dict):
            raise root.error("faults", f"fault #{i} must be an object")
        fields: Dict = {**base, **entry}
        fields.setdefault("seed", int(np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1)[0]))
        try:
            faults.append(FaultSpec(**fields))
        except (TypeError, ValueError) as e:
            raise root.error("faults", f"fault #{i}: {e}")

    try:
        campaign = FaultCampaign(
            faults=tuple(faults),
            warmup_length=warmup_length,
            stages=tuple(stages) if stages is not None else None,
            name=root.get("name", str, default=os.path.splitext(os.path.basename(path))[0]),
        )
    except ConfigError as e:
        raise ConfigError(e.message, path=path)
    logger.info(f"Loaded fault campaign '{campaign.name}' from {path}: {len(faults)} faults")
    return campaign
