"""
Run configuration: hyperparameters, topology and the JSON loader.
"""

import json
import math
import os
import re
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import ConfigError, TopologyError
from .logger import get_logger
from .model import Topology

logger = get_logger()

__all__ = [
    "Config",
    "load_config",
    "parse_config",
    "config_document",
    "JsonSection",
    "resolve_threads",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 1e-5
DEFAULT_MAX_ITERATIONS = 500
DEFAULT_IMC_TOL = 0.05
THREADS_ENV = "RELSEN_THREADS"


@dataclass(frozen=True)
class Config:
    """Hyperparameters of one engine.

    ``soft_sensors`` and ``gamma`` are keyed by process identifier.
    """

    r: float
    n_neighbors: int
    soft_sensors: Mapping[str, int]
    gamma: Mapping[str, float]
    window: int
    warmup_length: int
    epsilon: float = DEFAULT_EPSILON
    history_capacity: int = 1000
    rng_seed: int = 0
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    warmup_refit: bool = False
    imc_tol: float = DEFAULT_IMC_TOL

    def __post_init__(self):
        object.__setattr__(self, "soft_sensors", dict(self.soft_sensors))
        object.__setattr__(self, "gamma", dict(self.gamma))
        self.validate()

    def validate(self, topology: Optional[Topology] = None) -> "Config":
        if not 0 < self.r <= 1:
            raise ConfigError(f"r must lie in (0, 1], got {self.r}")
        if self.n_neighbors < 1:
            raise ConfigError(f"K must be a positive integer, got {self.n_neighbors}")
        if self.window < 1:
            raise ConfigError(f"l must be a positive integer, got {self.window}")
        if self.warmup_length <= max(self.n_neighbors, self.window):
            raise ConfigError(
                f"T={self.warmup_length} must exceed max(K, l)="
                f"{max(self.n_neighbors, self.window)}"
            )
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.history_capacity < self.n_neighbors:
            raise ConfigError(
                f"history_capacity={self.history_capacity} is smaller than "
                f"K={self.n_neighbors}"
            )
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if not self.imc_tol > 0:
            raise ConfigError(f"imc tol must be positive, got {self.imc_tol}")
        for process, m in self.soft_sensors.items():
            if m < 0:
                raise ConfigError(f"soft sensor count for '{process}' is negative")
        for process, g in self.gamma.items():
            if not (g >= 0 and math.isfinite(g)):
                raise ConfigError(f"gamma for '{process}' must be finite and >= 0")

        if topology is not None:
            for process in topology.processes:
                if process not in self.soft_sensors or process not in self.gamma:
                    raise ConfigError(f"no M_p / gamma_p resolved for '{process}'")
            sizes = topology.group_sizes()
            for p, process in enumerate(topology.processes):
                if self.soft_sensors[process] > 0 and topology.n_sensors - sizes[p] == 0:
                    raise ConfigError(
                        f"process '{process}' requests soft sensors but no sensor "
                        f"outside it exists"
                    )
        return self

    def m_vector(self, topology: Topology) -> Tuple[int, ...]:
        return tuple(int(self.soft_sensors[p]) for p in topology.processes)

    def gamma_vector(self, topology: Topology) -> np.ndarray:
        return np.array([self.gamma[p] for p in topology.processes], dtype=np.float64)

    def with_overrides(self, **changes: Any) -> "Config":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def resolve_threads(default: int = 1) -> int:
    """Worker cap from RELSEN_THREADS (default: sequential)."""
    raw = os.getenv(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def _line_of(text: str, key: str, after: int = 0) -> Optional[int]:
    """1-based line of the first ``"key"`` occurrence at or after line ``after``."""
    pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for number, line in enumerate(text.splitlines(), 1):
        if number >= after and pattern.search(line):
            return number
    return None


class JsonSection:
    """Typed access to a JSON object that remembers where its keys live."""

    def __init__(self, data: Mapping[str, Any], text: str, path: Optional[str], name: str):
        self.data = data
        self.text = text
        self.path = path
        self.name = name
        self.start = _line_of(text, name) or 0 if name else 0

    def error(self, key: str, message: str) -> ConfigError:
        line = _line_of(self.text, key, self.start) or self.start or None
        return ConfigError(message, path=self.path, line=line)

    def get(self, key: str, kind, default=None, required: bool = False):
        if key not in self.data:
            if required:
                raise ConfigError(
                    f"missing required key '{key}' in '{self.name or 'root'}'",
                    path=self.path,
                    line=self.start or None,
                )
            return default
        value = self.data[key]
        if kind is bool:
            if not isinstance(value, bool):
                raise self.error(key, f"'{key}' must be true or false, got {value!r}")
            return value
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.error(key, f"'{key}' must be an integer, got {value!r}")
            return value
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self.error(key, f"'{key}' must be a number, got {value!r}")
            return float(value)
        if kind is dict:
            if not isinstance(value, dict):
                raise self.error(key, f"'{key}' must be an object")
            return value
        if kind is list:
            if not isinstance(value, list):
                raise self.error(key, f"'{key}' must be a list")
            return value
        if kind is str:
            if not isinstance(value, str):
                raise self.error(key, f"'{key}' must be a string, got {value!r}")
            return value
        return value

    def child(self, key: str) -> "JsonSection":
        return JsonSection(self.get(key, dict, default={}), self.text, self.path, key)


def parse_config(
    text: str, path: Optional[str] = None
) -> Tuple[Config, Topology]:
    """Parse and validate a JSON configuration document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", path, e.lineno)
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be an object", path, 1)

    root = JsonSection(raw, text, path, "")
    topo_section = root.child("topology")
    groups = topo_section.get("processes", dict, required=True)
    for process, sensors in groups.items():
        if not isinstance(sensors, list) or not all(isinstance(s, str) for s in sensors):
            raise topo_section.error(
                process, f"process '{process}' must list sensor names"
            )
    try:
        topology = Topology.from_groups(groups)
    except TopologyError as e:
        # the last listing of the named sensor/process is the offending one
        culprit = re.search(r"'([^']+)'", e.message)
        line = None
        if culprit:
            quoted = f'"{culprit.group(1)}"'
            hits = [n for n, row in enumerate(text.splitlines(), 1) if quoted in row]
            line = hits[-1] if hits else None
        raise TopologyError(e.message, path=path, line=line or topo_section.start or None)

    hyper = root.child("hyperparameters")
    softs = root.child("soft_sensors")
    gammas = root.child("gamma")
    imc = root.child("imc")

    per_process_m = softs.get("per_process", dict, default={})
    total_sources = softs.get("total_sources", int)
    sizes = dict(zip(topology.processes, topology.group_sizes().tolist()))
    soft_sensors: Dict[str, int] = {}
    for process in topology.processes:
        if process in per_process_m:
            value = per_process_m[process]
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise softs.error(process, f"M_p for '{process}' must be an integer >= 0")
            soft_sensors[process] = value
        elif total_sources is not None:
            soft_sensors[process] = max(0, total_sources - sizes[process])
        else:
            soft_sensors[process] = 0
    for process in per_process_m:
        if process not in sizes:
            raise softs.error(process, f"soft_sensors names unknown process '{process}'")

    default_gamma = gammas.get("default", float, default=1.0)
    per_process_gamma = gammas.get("per_process", dict, default={})
    gamma: Dict[str, float] = {}
    for process in topology.processes:
        value = per_process_gamma.get(process, default_gamma)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise gammas.error(process, f"gamma for '{process}' must be a number")
        gamma[process] = float(value)
    for process in per_process_gamma:
        if process not in sizes:
            raise gammas.error(process, f"gamma names unknown process '{process}'")

    fields = {
        "r": hyper.get("r", float, default=0.7),
        "n_neighbors": hyper.get("K", int, default=48),
        "window": hyper.get("l", int, default=72),
        "warmup_length": hyper.get("T", int, default=168),
        "epsilon": hyper.get("epsilon", float, default=DEFAULT_EPSILON),
        "history_capacity": hyper.get("history_capacity", int, default=1000),
        "max_iterations": hyper.get("max_iterations", int, default=DEFAULT_MAX_ITERATIONS),
        "warmup_refit": hyper.get("warmup_refit", bool, default=False),
        "imc_tol": imc.get("tol", float, default=DEFAULT_IMC_TOL),
        "rng_seed": root.get("rng_seed", int, default=0),
    }
    # most specific first: the T message also names K and l
    pinned_keys = [
        ("history_capacity", hyper),
        ("max_iterations", hyper),
        ("epsilon", hyper),
        ("tol", imc),
        ("T", hyper),
        ("K", hyper),
        ("l", hyper),
        ("r", hyper),
    ]
    try:
        config = Config(soft_sensors=soft_sensors, gamma=gamma, **fields)
        config.validate(topology)
    except ConfigError as e:
        process = re.search(r"process '([^']+)' requests soft sensors", e.message)
        if process:
            raise softs.error(process.group(1), e.message)
        for key, section in pinned_keys:
            if re.search(rf"\b{re.escape(key)}\b", e.message):
                raise section.error(key, e.message)
        raise ConfigError(e.message, path=path)
    return config, topology


def load_config(path: str) -> Tuple[Config, Topology]:
    """Read a JSON configuration file."""
    if not os.path.exists(path):
        raise ConfigError("configuration file not found", path=path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    config, topology = parse_config(text, path)
    logger.info(
        f"Loaded config from {path}: {topology.n_processes} processes, "
        f"{topology.n_sensors} sensors, T={config.warmup_length}, l={config.window}"
    )
    return config, topology


def config_document(config: Config, topology: Topology) -> Dict[str, Any]:
    """Inverse of ``parse_config`` (explicit per-process values)."""
    return {
        "topology": {"processes": topology.groups()},
        "hyperparameters": {
            "r": config.r,
            "K": config.n_neighbors,
            "l": config.window,
            "T": config.warmup_length,
            "epsilon": config.epsilon,
            "history_capacity": config.history_capacity,
            "max_iterations": config.max_iterations,
            "warmup_refit": config.warmup_refit,
        },
        "soft_sensors": {"per_process": dict(config.soft_sensors)},
        "gamma": {"per_process": dict(config.gamma)},
        "imc": {"tol": config.imc_tol},
        "rng_seed": config.rng_seed,
    }
