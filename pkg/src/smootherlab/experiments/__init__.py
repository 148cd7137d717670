"""Sweep schedules, family adapters and diagnostic studies."""
from .families import BoostFamily, PointEval, RffLinearFamily, TreeFamily
from .schedule import (
    AXES,
    AXIS2_INIT,
    FAMILIES,
    SweepConfig,
    SweepPoint,
    SweepSchedule,
    composite_schedule,
)
from .studies import (
    AnalyticModelConfig,
    BiasVarianceReport,
    ConditionRow,
    FixedDesignReport,
    SelectionResult,
    SelectionRow,
    bias_variance,
    cond_study,
    fixed_design_check,
    model_selection_study,
)
from .sweep import (
    SWEEP_HEADER,
    THREADS_ENV,
    BackToUResult,
    BranchRecord,
    SweepRecord,
    SweepResult,
    back_to_u,
    increase_violations,
    median_curve,
    multiple_descent,
    peak_move,
    replicated_sweep,
    resolve_threads,
    run_grid,
    run_sweep,
    seed_standard_error,
)

__all__ = [
    "AXES",
    "AXIS2_INIT",
    "FAMILIES",
    "SWEEP_HEADER",
    "THREADS_ENV",
    "AnalyticModelConfig",
    "BackToUResult",
    "BiasVarianceReport",
    "BoostFamily",
    "BranchRecord",
    "ConditionRow",
    "FixedDesignReport",
    "PointEval",
    "RffLinearFamily",
    "SelectionResult",
    "SelectionRow",
    "SweepConfig",
    "SweepPoint",
    "SweepRecord",
    "SweepResult",
    "SweepSchedule",
    "TreeFamily",
    "back_to_u",
    "bias_variance",
    "composite_schedule",
    "cond_study",
    "fixed_design_check",
    "increase_violations",
    "median_curve",
    "model_selection_study",
    "multiple_descent",
    "peak_move",
    "replicated_sweep",
    "resolve_threads",
    "run_grid",
    "run_sweep",
    "seed_standard_error",
]
