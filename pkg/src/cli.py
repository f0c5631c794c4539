"""
Command-line modes: run, inject, bench and synth.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .cleaners import SUPPORTED_METHODS, get_cleaner
from .config import config_document, load_config
from .data import CsvStreamWriter, frames_from_frame, read_stream, write_frames
from .errors import EXIT_CONFIG, EXIT_OK, ConfigError, exit_code_for
from .faults import FaultKind, apply_campaign, load_fault_spec, one_per_process
from .logger import get_logger, set_verbose
from .report import DEFAULT_WINDOWS, BenchRunner
from .synth import DEFAULT_STEPS, air_quality_config, generate

logger = get_logger()

MODES = ("run", "inject", "bench", "synth")


@dataclass(frozen=True)
class RunManifest:
    """Validated command-line request."""

    mode: str
    output: str
    input: Optional[str] = None
    config: Optional[str] = None
    seed: Optional[int] = None
    method: str = "relsen"
    fault_spec: Optional[str] = None
    steps: Optional[int] = None
    windows: Sequence[int] = DEFAULT_WINDOWS

    def validate(self) -> "RunManifest":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}', expected one of {MODES}")
        required = {
            "run": ("input", "config"),
            "inject": ("input", "fault_spec"),
            "bench": (),
            "synth": (),
        }[self.mode]
        for name in required:
            if getattr(self, name) is None:
                raise ConfigError(f"--mode {self.mode} requires --{name.replace('_', '-')}")
        for name in ("input", "config", "fault_spec"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"--{name.replace('_', '-')} path does not exist: {path}")
        if self.mode == "bench" and self.input is not None and self.config is None:
            raise ConfigError("--mode bench with --input also needs --config for the topology")
        if self.method not in SUPPORTED_METHODS:
            raise ConfigError(f"unknown method '{self.method}', expected one of {SUPPORTED_METHODS}")
        if self.steps is not None and self.steps < 2:
            raise ConfigError(f"--steps must be at least 2, got {self.steps}")
        return self

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunManifest":
        return cls(
            mode=args.mode,
            output=args.output,
            input=args.input,
            config=args.config,
            seed=args.seed,
            method=args.method,
            fault_spec=args.fault_spec,
            steps=args.steps,
            windows=tuple(args.windows),
        ).validate()


def _load(manifest: RunManifest):
    config, topology = load_config(manifest.config)
    if manifest.seed is not None:
        config = config.with_overrides(rng_seed=manifest.seed)
    return config, topology


def cmd_run(manifest: RunManifest) -> int:
    """Warm up on the first T rows, then stream the rest."""
    config, topology = _load(manifest)
    frames = frames_from_frame(read_stream(manifest.input, topology))
    T = config.warmup_length
    if len(frames) < T:
        raise ConfigError(
            f"warm-up length T={T} exceeds the {len(frames)} rows of {manifest.input}",
            path=manifest.config,
        )

    os.makedirs(manifest.output, exist_ok=True)
    cleaner = get_cleaner(manifest.method, config, topology)
    cleaned_path = os.path.join(manifest.output, "cleaned.csv")
    scores_path = os.path.join(manifest.output, "scores.csv")
    try:
        with CsvStreamWriter(cleaned_path, topology.processes) as states_out:
            scores_out = (
                CsvStreamWriter(scores_path, topology.sensors) if cleaner.has_scores else None
            )
            try:
                for result in cleaner.warm(frames[:T]):
                    states_out.write(result.t, result.estimate.states)
                    if scores_out is not None:
                        scores_out.write(result.t, result.scores)
                for n, result in enumerate(cleaner.run(frames[T:]), 1):
                    states_out.write(result.t, result.estimate.states)
                    if scores_out is not None:
                        scores_out.write(result.t, result.scores)
                    if n % 500 == 0:
                        logger.info(f"Streamed {n} frames (t={result.t})")
            finally:
                if scores_out is not None:
                    scores_out.close()
    finally:
        cleaner.close()

    warmup = getattr(cleaner, "warmup", None)
    if warmup is not None:
        summary_path = os.path.join(manifest.output, "warmup_summary.json")
        with open(summary_path, "w", encoding="utf-8") as f:
            json.dump(warmup.summary(topology), f, indent=2, ensure_ascii=False)
        logger.info(f"Warm-up summary saved to {summary_path}")
    return EXIT_OK


def cmd_inject(manifest: RunManifest) -> int:
    """Apply a fault campaign file to a clean CSV."""
    clean = read_stream(manifest.input)
    campaign = load_fault_spec(manifest.fault_spec, default_seed=manifest.seed or 0)
    faulted, mask = apply_campaign(clean, campaign)
    os.makedirs(manifest.output, exist_ok=True)
    write_frames(faulted, os.path.join(manifest.output, "faulted.csv"))
    write_frames(mask, os.path.join(manifest.output, "mask.csv"))
    return EXIT_OK


def _bench_inputs(manifest: RunManifest):
    seed = manifest.seed if manifest.seed is not None else 0
    if manifest.config is not None:
        config, topology = _load(manifest)
        if manifest.input is not None:
            clean = read_stream(manifest.input, topology)
        else:
            clean, generated = generate(
                schema=dict(zip(topology.processes, topology.group_sizes().tolist())),
                n_steps=manifest.steps or DEFAULT_STEPS,
                seed=seed,
            )
            if generated.sensors != topology.sensors:
                raise ConfigError(
                    "synthetic data names sensors '{process}_{i}'; the config topology "
                    "uses other names, pass --input",
                    path=manifest.config,
                )
    else:
        clean, topology = generate(n_steps=manifest.steps or DEFAULT_STEPS, seed=seed)
        config = air_quality_config(topology, seed=seed)
    if manifest.steps is not None:
        clean = clean.iloc[: manifest.steps]
    return clean, config, topology


def cmd_bench(manifest: RunManifest) -> int:
    """Ground truth, one campaign per fault kind (or the given spec), every
    method, reports."""
    clean, config, topology = _bench_inputs(manifest)
    seed = config.rng_seed
    if manifest.fault_spec is not None:
        campaigns = [load_fault_spec(manifest.fault_spec, default_seed=seed)]
    else:
        campaigns = [
            one_per_process(topology, kind, config.warmup_length, seed=seed)
            for kind in FaultKind
        ]

    runner = BenchRunner(output_dir=manifest.output)
    runner.run_all(clean, topology, config, campaigns, windows=manifest.windows)
    runner.print_summary()
    runner.save_all()
    return EXIT_OK


def cmd_synth(manifest: RunManifest) -> int:
    """Synthetic clean data plus a loadable config for its topology."""
    seed = manifest.seed if manifest.seed is not None else 0
    clean, topology = generate(n_steps=manifest.steps or DEFAULT_STEPS, seed=seed)
    config = air_quality_config(topology, seed=seed)
    os.makedirs(manifest.output, exist_ok=True)
    write_frames(clean, os.path.join(manifest.output, "clean.csv"))
    path = os.path.join(manifest.output, "topology.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_document(config, topology), f, indent=2)
    logger.info(f"Config saved to {path}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "inject": cmd_inject, "bench": cmd_bench, "synth": cmd_synth}


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the configuration status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        description="RelSen - streaming sensor reliability scoring and data cleaning",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate synthetic air-quality data and its config
  python relsen.py --mode synth --output data/synth --seed 3

  # Clean a stream
  python relsen.py --mode run --input data/synth/clean.csv --config data/synth/topology.json --output out

  # Inject faults described in a campaign file
  python relsen.py --mode inject --input data/synth/clean.csv --fault-spec config/faults_staged_noise.json --output out

  # Full benchmark on synthetic data
  python relsen.py --mode bench --output reports --seed 0
        """,
    )
    parser.add_argument("--mode", choices=MODES, required=True, help="What to do")
    parser.add_argument("--input", type=str, default=None, help="Measurement CSV (first column t)")
    parser.add_argument("--config", type=str, default=None, help="JSON configuration file")
    parser.add_argument("--output", type=str, default="./results", help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Override rng_seed")
    parser.add_argument(
        "--method", choices=SUPPORTED_METHODS, default="relsen", help="Cleaning method for run mode"
    )
    parser.add_argument("--fault-spec", type=str, default=None, help="Fault campaign JSON")
    parser.add_argument(
        "--steps", type=int, default=None, help="Number of rows to generate or benchmark"
    )
    parser.add_argument(
        "--windows",
        type=int,
        nargs="+",
        default=list(DEFAULT_WINDOWS),
        help="Window lengths swept for windowed methods in bench mode",
    )
    parser.add_argument("--verbose", action="store_true", help="Enable verbose logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbose(True)

    try:
        manifest = RunManifest.from_args(args)
        logger.info(f"Mode: {manifest.mode}, output: {manifest.output}")
        status = COMMANDS[manifest.mode](manifest)
        logger.info(f"🎉 {manifest.mode} completed successfully!")
        return status
    except Exception as e:
        logger.error(f"❌ {args.mode} failed: {e}")
        logger.debug("traceback", exc_info=True)
        return exit_code_for(e)
