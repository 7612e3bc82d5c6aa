"""Variance-aware arm-elimination bandits with baselines, a deterministic
replication harness, regret-bound calculators, and lemma verifiers."""

from .env import ArmModel, Environment, derive_run_stream, make_environment, sample_reward
from .rng import RngStream, StreamBatch
from .simulator import AggregateCurve, RunTrace, run_many, run_once
from .stats import ArmStats, PullStats, UndefinedEstimateError

__version__ = "0.1.0"

__all__ = [
    "ArmModel",
    "Environment",
    "make_environment",
    "sample_reward",
    "derive_run_stream",
    "RngStream",
    "StreamBatch",
    "ArmStats",
    "PullStats",
    "UndefinedEstimateError",
    "RunTrace",
    "AggregateCurve",
    "run_once",
    "run_many",
    "__version__",
]
