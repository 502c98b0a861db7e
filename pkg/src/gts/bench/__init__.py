"""Benchmark engine: batch runs, evaluation, and ablation comparisons."""

from .ablate import DEFAULT_VARIANTS, AblationResult, diff_artifacts, run_ablation
from .config import BenchConfig, config_fingerprint, load_config
from .evaluate import SummaryTable, evaluate_run
from .runner import RunOutcome, run_batch

__all__ = [
    "BenchConfig",
    "load_config",
    "config_fingerprint",
    "RunOutcome",
    "run_batch",
    "SummaryTable",
    "evaluate_run",
    "AblationResult",
    "DEFAULT_VARIANTS",
    "run_ablation",
    "diff_artifacts",
]
