"""
Streaming reliability scoring and cleaning engine.
"""

from .cleaning import estimate_states, l1_objective
from .pipeline import EngineState, RelSenEngine, StepResult, bootstrap, step
from .reliability import (
    ReliabilityState,
    WindowRecord,
    attributed_errors,
    g_coefficient,
    scores_from_errors,
    update_scores,
)
from .soft_sensor import (
    ErrorNormalizer,
    HistoryStore,
    SoftSensorRecord,
    build_soft_sensor,
    evaluate,
    fit_local,
    knn,
    normalized_error,
    select_explanatory,
    soft_reliability,
)
from .warmup import (
    WarmupProblem,
    WarmupResult,
    init_states,
    joint_objective,
    run_warmup,
    solve_states,
    update_scores_warmup,
)

__all__ = [
    "estimate_states",
    "l1_objective",
    "EngineState",
    "RelSenEngine",
    "StepResult",
    "bootstrap",
    "step",
    "ReliabilityState",
    "WindowRecord",
    "attributed_errors",
    "g_coefficient",
    "scores_from_errors",
    "update_scores",
    "ErrorNormalizer",
    "HistoryStore",
    "SoftSensorRecord",
    "build_soft_sensor",
    "evaluate",
    "fit_local",
    "knn",
    "normalized_error",
    "select_explanatory",
    "soft_reliability",
    "WarmupProblem",
    "WarmupResult",
    "init_states",
    "joint_objective",
    "run_warmup",
    "solve_states",
    "update_scores_warmup",
]
