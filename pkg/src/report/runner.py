"""
Unified execution entry point for the fault-injection benchmark.
"""

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..cleaners import SUPPORTED_METHODS, WINDOWED_METHODS, CleanedStep, get_cleaner, run_cleaner
from ..config import Config, config_document
from ..data import TIME_COLUMN, frames_from_frame
from ..errors import ConfigError
from ..faults import FaultCampaign, apply_campaign
from ..logger import get_logger
from ..model import EstimateFrame, MeasurementFrame, Topology, fit_normalizer, normalize
from .html_reporter import HTMLReporter
from .metrics import abs_error, average_mae, ground_truth, mae_by_process

logger = get_logger()

DEFAULT_WINDOWS = (24, 72, 120)


@dataclass
class BenchmarkRun:
    """One (method, window, fault campaign) cell of the comparison."""

    method: str
    fault: str
    per_process: Dict[str, float]
    average: float
    runtime: float
    window: Optional[int] = None
    seed: int = 0
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.method}(l={self.window})" if self.window is not None else self.method

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchmarkRun":
        return cls(**data)


def method_variants(
    methods: Sequence[str], windows: Optional[Sequence[int]], warmup_length: int
) -> List[Tuple[str, Optional[int]]]:
    """(method, window) cells; windowed methods get one cell per admissible
    window length (T must exceed l)."""
    variants: List[Tuple[str, Optional[int]]] = []
    for method in methods:
        if method not in SUPPORTED_METHODS:
            raise ConfigError(f"unknown method '{method}', expected one of {SUPPORTED_METHODS}")
        if method in WINDOWED_METHODS and windows:
            for l in windows:
                if l >= warmup_length:
                    logger.warning(f"Skipping {method} with l={l}: T={warmup_length} must exceed l")
                    continue
                variants.append((method, l))
        else:
            variants.append((method, None))
    return variants


def evaluate_method(
    method: str,
    window: Optional[int],
    config: Config,
    topology: Topology,
    frames: Sequence[MeasurementFrame],
    truth: Sequence[EstimateFrame],
    fault: str,
    threads: Optional[int] = None,
) -> Tuple[BenchmarkRun, List[CleanedStep]]:
    """Clean ``frames`` with one method and score the post-warm-up span."""
    kwargs: Dict[str, Any] = {}
    if window is not None:
        kwargs["window"] = window
    if method == "relsen":
        kwargs["threads"] = threads
    cleaner = get_cleaner(method, config, topology, **kwargs)

    T = config.warmup_length
    start = time.perf_counter()
    steps = run_cleaner(cleaner, frames, T)
    runtime = time.perf_counter() - start

    estimates = [s.estimate for s in steps]
    per_process = mae_by_process(estimates[T:], truth[T:], topology)
    run = BenchmarkRun(
        method=method,
        fault=fault,
        per_process=per_process,
        average=average_mae(per_process),
        runtime=runtime,
        window=window,
        seed=config.rng_seed,
        config=config_document(
            config.with_overrides(window=window) if window is not None else config, topology
        ),
    )
    return run, steps


def compare(
    methods: Sequence[str],
    frames: Sequence[MeasurementFrame],
    truth: Sequence[EstimateFrame],
    config: Config,
    topology: Topology,
    fault: str,
    windows: Optional[Sequence[int]] = DEFAULT_WINDOWS,
    threads: Optional[int] = None,
) -> List[BenchmarkRun]:
    """One BenchmarkRun per (method, window) on the same faulted stream."""
    return [
        evaluate_method(method, window, config, topology, frames, truth, fault, threads)[0]
        for method, window in method_variants(methods, windows, config.warmup_length)
    ]


def _long_frame(
    fault: str, ts: np.ndarray, values: np.ndarray, names: Sequence[str], prefix: str
) -> pd.DataFrame:
    wide = pd.DataFrame(values, columns=[f"{prefix}/{n}" for n in names])
    wide.insert(0, TIME_COLUMN, ts)
    long = wide.melt(id_vars=TIME_COLUMN, var_name="series", value_name="value")
    long.insert(0, "fault", fault)
    return long


class BenchRunner:
    """Main runner class for the cleaning benchmark."""

    def __init__(self, output_dir: str = "reports"):
        self.output_dir = output_dir
        self.html_reporter = HTMLReporter(output_dir)
        self.runs: List[BenchmarkRun] = []
        self.traces: List[pd.DataFrame] = []
        self.meta: Dict[str, Any] = {}

        os.makedirs(output_dir, exist_ok=True)

    def run_all(
        self,
        clean: pd.DataFrame,
        topology: Topology,
        config: Config,
        campaigns: Sequence[FaultCampaign],
        methods: Optional[Sequence[str]] = None,
        windows: Optional[Sequence[int]] = DEFAULT_WINDOWS,
        threads: Optional[int] = None,
    ) -> List[BenchmarkRun]:
        """
        Run every method on every fault campaign.

        Args:
            clean: Clean measurement frame (``t`` + sensor columns)
            topology: Sensor to process mapping
            config: Engine configuration (window overridden per cell)
            campaigns: Fault campaigns, run separately
            methods: Method ids, default all
            windows: Window lengths swept for windowed methods

        Returns:
            List[BenchmarkRun]: Results of all cells
        """
        logger.info("🚀 Starting benchmark for all fault campaigns...")
        methods = list(methods or SUPPORTED_METHODS)
        self.meta.update(
            {
                "methods": methods,
                "windows": list(windows) if windows else [],
                "seed": config.rng_seed,
                "warmup_length": config.warmup_length,
                "steps": int(len(clean)),
                "processes": list(topology.processes),
                "sensors": list(topology.sensors),
            }
        )
        for campaign in campaigns:
            logger.info(f"📊 Running campaign {campaign.name}...")
            self.run_single(clean, topology, config, campaign, methods, windows, threads)
        logger.info("✅ All campaigns evaluated successfully!")
        return self.runs

    def run_single(
        self,
        clean: pd.DataFrame,
        topology: Topology,
        config: Config,
        campaign: FaultCampaign,
        methods: Sequence[str],
        windows: Optional[Sequence[int]] = DEFAULT_WINDOWS,
        threads: Optional[int] = None,
    ) -> List[BenchmarkRun]:
        T = config.warmup_length
        if campaign.warmup_length != T:
            raise ConfigError(
                f"campaign '{campaign.name}' starts faults at {campaign.warmup_length}, "
                f"but the engine warms up on T={T} rows"
            )
        columns = [TIME_COLUMN, *topology.sensors]
        faulted, _ = apply_campaign(clean[columns], campaign)
        clean_frames = frames_from_frame(clean[columns])
        frames = frames_from_frame(faulted)

        # faults start after T, so this equals the clean warm-up normalizer
        normalizer = fit_normalizer(frames[:T], topology.sensors)
        truth = ground_truth(clean_frames, topology, normalizer)
        ts = np.array([f.t for f in frames], dtype=np.int64)
        truth_matrix = np.vstack([f.states for f in truth])

        fault = campaign.name
        sp = topology.sensor_process
        targets = [spec.target for spec in campaign.faults]
        idx = [topology.sensors.index(s) for s in targets]
        raw = np.vstack([normalize(f, normalizer).values for f in frames])[:, idx]
        self.traces.append(
            _long_frame(fault, ts, np.abs(raw - truth_matrix[:, sp[idx]]), targets, "abs_error/raw")
        )

        runs = []
        variants = method_variants(methods, windows, T)
        for method, window in tqdm(variants, desc=f"Cleaning ({fault})"):
            run, steps = evaluate_method(
                method, window, config, topology, frames, truth, fault, threads
            )
            runs.append(run)
            estimates = [s.estimate for s in steps]
            self.traces.append(
                _long_frame(fault, ts, abs_error(estimates, truth), topology.processes, f"abs_error/{run.label}")
            )
            if steps and steps[0].scores is not None:
                scores = np.vstack([s.scores for s in steps])
                self.traces.append(
                    _long_frame(fault, ts, scores, topology.sensors, f"score/{run.label}")
                )
            logger.info(f"{fault} / {run.label}: average MAE {run.average:.4f} ({run.runtime:.1f}s)")

        self.meta.setdefault("faulty_sensors", {})[fault] = targets
        self.runs.extend(runs)
        return runs

    def summary_table(self) -> pd.DataFrame:
        """Rows (fault, process) plus one ``average`` row per fault; one
        column per method label."""
        if not self.runs:
            return pd.DataFrame()
        labels = list(dict.fromkeys(run.label for run in self.runs))
        faults = list(dict.fromkeys(run.fault for run in self.runs))
        rows = []
        for fault in faults:
            cells = {run.label: run for run in self.runs if run.fault == fault}
            processes = list(next(iter(cells.values())).per_process)
            for process in [*processes, "average"]:
                row: Dict[str, Any] = {"fault": fault, "process": process}
                for label in labels:
                    run = cells.get(label)
                    if run is None:
                        row[label] = np.nan
                    elif process == "average":
                        row[label] = run.average
                    else:
                        row[label] = run.per_process[process]
                rows.append(row)
        return pd.DataFrame(rows, columns=["fault", "process", *labels])

    def best_methods(self) -> Dict[str, str]:
        """Lowest average MAE per fault campaign."""
        best: Dict[str, BenchmarkRun] = {}
        for run in self.runs:
            if run.fault not in best or run.average < best[run.fault].average:
                best[run.fault] = run
        return {fault: run.label for fault, run in best.items()}

    def save_csv_report(self, filename: str = "bench_report.csv") -> str:
        if not self.runs:
            logger.warning("No benchmark results to save. Run the benchmark first.")
            return ""
        filepath = os.path.join(self.output_dir, filename)
        self.summary_table().to_csv(filepath, index=False, float_format="%.6f")
        logger.info(f"💾 CSV report saved: {filepath}")
        return filepath

    def format_text_report(self) -> str:
        table = self.summary_table()
        lines = ["MAE of cleaned states (normalized units, post-warm-up span)", ""]
        lines.append(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
        lines.append("")
        for fault, label in self.best_methods().items():
            lines.append(f"best on {fault}: {label}")
        return "\n".join(lines) + "\n"

    def save_text_report(self, filename: str = "bench_report.txt") -> str:
        if not self.runs:
            logger.warning("No benchmark results to save. Run the benchmark first.")
            return ""
        filepath = os.path.join(self.output_dir, filename)
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(self.format_text_report())
        logger.info(f"📄 Text report saved: {filepath}")
        return filepath

    def save_traces(self, filename: str = "traces.csv") -> str:
        if not self.traces:
            logger.warning("No traces recorded.")
            return ""
        filepath = os.path.join(self.output_dir, filename)
        pd.concat(self.traces, ignore_index=True).to_csv(filepath, index=False, float_format="%.8g")
        logger.info(f"💾 Traces saved: {filepath}")
        return filepath

    def save_json_results(self, filename: str = "bench_results.json") -> str:
        """
        Save benchmark results (runtimes included) to a JSON file.

        Returns:
            str: Path to the saved JSON file
        """
        if not self.runs:
            logger.warning("No benchmark results to save. Run the benchmark first.")
            return ""
        filepath = os.path.join(self.output_dir, filename)
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(
                {"meta": self.meta, "runs": [run.to_dict() for run in self.runs]},
                f,
                indent=2,
                ensure_ascii=False,
            )
        logger.info(f"💾 JSON results saved: {filepath}")
        return filepath

    def generate_html_report(self, filename: str = "bench_report.html") -> str:
        if not self.runs:
            logger.warning("No benchmark results to report. Run the benchmark first.")
            return ""
        logger.info("📝 Generating HTML report...")
        return self.html_reporter.generate_report(
            self.summary_table(), self.runs, self.meta, self.best_methods(), filename
        )

    def save_all(self) -> Dict[str, str]:
        return {
            "csv": self.save_csv_report(),
            "txt": self.save_text_report(),
            "json": self.save_json_results(),
            "html": self.generate_html_report(),
            "traces": self.save_traces(),
        }

    @classmethod
    def from_json(cls, path: str, output_dir: Optional[str] = None) -> "BenchRunner":
        """Runner holding the runs of a saved ``bench_results.json``."""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        runner = cls(output_dir or os.path.dirname(os.path.abspath(path)))
        runner.meta = data.get("meta", {})
        runner.runs = [BenchmarkRun.from_dict(run) for run in data.get("runs", [])]
        logger.info(f"Loaded {len(runner.runs)} benchmark runs from {path}")
        return runner

    def print_summary(self):
        """Print a summary of benchmark results."""
        if not self.runs:
            print("No benchmark results available.")
            return

        print("\n" + "=" * 60)
        print("📊 CLEANING BENCHMARK SUMMARY")
        print("=" * 60)
        print(self.format_text_report())
        print("=" * 60)
