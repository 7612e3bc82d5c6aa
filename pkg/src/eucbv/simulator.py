"""Policy-vs-environment driver and replication harness.

Regret accounting is pseudo-regret: after every pull of arm i the cumulative
regret grows by the true gap of arm i, so a trace depends only on pull
decisions and true means (never on realized rewards directly).

Replications are bit-reproducible and partition-independent: run k always
consumes the streams derived from (master_seed, k), whether executed alone,
inside a batch, serially, or across worker processes.  run_many splits runs
into fixed-size chunks (independent of --threads) and merges results by run
index, so the aggregate bytes never depend on the degree of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .env import Environment, make_environment, sample_reward, sample_rewards_batch
from .policies import make_batch_policy
from .rng import DOMAIN_POLICY, DOMAIN_REWARDS, RngStream, StreamBatch

DEFAULT_CHECKPOINTS = 200
CHUNK_RUNS = 50  # fixed batch width; must not depend on thread count


@dataclass(frozen=True)
class RunTrace:
    """Full trajectory of one replication."""

    run_index: int
    regret_curve: np.ndarray  # (T,) cumulative pseudo-regret
    pulls: np.ndarray         # (K,) final pull counts
    survivor: int | None      # surviving arm for eliminating policies


@dataclass(frozen=True)
class AggregateCurve:
    """Across-run mean/stderr of the regret curve at checkpoints."""

    policy_id: str
    run_count: int
    checkpoint_ts: np.ndarray   # (C,) timesteps, last one == T
    mean_regret: np.ndarray     # (C,)
    stderr_regret: np.ndarray   # (C,)

    @property
    def final_mean(self) -> float:
        return float(self.mean_regret[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr_regret[-1])


def checkpoint_times(horizon: int, n_checkpoints: int = DEFAULT_CHECKPOINTS) -> np.ndarray:
    """Evenly spaced integer checkpoints in [1, T]; T is always included."""
    if n_checkpoints < 1:
        raise ValueError("need at least one checkpoint")
    if horizon <= n_checkpoints:
        return np.arange(1, horizon + 1, dtype=np.int64)
    ts = (np.arange(1, n_checkpoints + 1, dtype=np.int64) * horizon) // n_checkpoints
    return np.unique(ts)


def run_once(env: Environment, policy, horizon: int, rng: RngStream,
             run_index: int = 0) -> RunTrace:
    """Drive a freshly initialized single-run policy for exactly T pulls."""
    n_arms = env.n_arms
    if horizon < n_arms:
        raise ValueError(f"horizon {horizon} < number of arms {n_arms}")
    gaps = env.gaps
    curve = np.empty(horizon, dtype=np.float64)
    pulls = np.zeros(n_arms, dtype=np.int64)
    regret = 0.0
    for t in range(1, horizon + 1):
        arm = policy.select(t)
        reward = sample_reward(env.arms[arm], rng)
        policy.update(arm, reward)
        pulls[arm] += 1
        regret += gaps[arm]
        curve[t - 1] = regret
    survivor = policy.survivor() if hasattr(policy, "survivor") else None
    return RunTrace(run_index, curve, pulls, survivor)


def run_batch(env: Environment, policy, horizon: int, reward_streams: StreamBatch,
              checkpoint_ts: np.ndarray):
    """Drive a batched policy; returns (curves (R,C), pulls (R,K), survivors)."""
    gaps = env.gaps
    n_runs = len(reward_streams)
    curves = np.empty((n_runs, len(checkpoint_ts)), dtype=np.float64)
    regret = np.zeros(n_runs, dtype=np.float64)
    ck = 0
    next_ck = int(checkpoint_ts[0])
    for t in range(1, horizon + 1):
        arms = policy.select(t)
        rewards = sample_rewards_batch(env, arms, reward_streams)
        policy.update(arms, rewards)
        regret += gaps[arms]
        if t == next_ck:
            curves[:, ck] = regret
            ck += 1
            next_ck = int(checkpoint_ts[ck]) if ck < len(checkpoint_ts) else 0
    return curves, policy.pull_counts(), policy.survivors()


def _chunk_bounds(runs: int) -> list:
    return [(lo, min(lo + CHUNK_RUNS, runs)) for lo in range(0, runs, CHUNK_RUNS)]


def _simulate_chunk(args):
    (arm_specs, policy_id, params, horizon, master_seed, lo, hi, ck_list) = args
    env = make_environment(arm_specs)
    run_indices = range(lo, hi)
    reward_streams = StreamBatch.for_runs(master_seed, run_indices, DOMAIN_REWARDS)
    policy_streams = StreamBatch.for_runs(master_seed, run_indices, DOMAIN_POLICY)
    policy = make_batch_policy(policy_id, hi - lo, env.n_arms, horizon,
                               params, rng=policy_streams)
    ck = np.asarray(ck_list, dtype=np.int64)
    curves, pulls, survivors = run_batch(env, policy, horizon, reward_streams, ck)
    return lo, curves, pulls, survivors


def run_many(env: Environment, policy, horizon: int, runs: int, master_seed: int, *,
             threads: int = 1,
             n_checkpoints: int = DEFAULT_CHECKPOINTS) -> AggregateCurve:
    """Aggregate ``runs`` independent replications of one policy.

    ``policy`` is a registered policy id, an (id, params) pair, or a callable
    factory ``(n_arms, horizon, rng) -> single-run policy`` (callables run
    serially through :func:`run_once`).  Replication k uses the reward and
    policy streams derived from (master_seed, k).  The aggregate is invariant
    to ``threads``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    ck = checkpoint_times(horizon, n_checkpoints)
    if callable(policy):
        curves = np.empty((runs, len(ck)), dtype=np.float64)
        for k in range(runs):
            reward_rng = _reward_stream(master_seed, k)
            instance = policy(env.n_arms, horizon, _policy_stream(master_seed, k))
            trace = run_once(env, instance, horizon, reward_rng, run_index=k)
            curves[k] = trace.regret_curve[ck - 1]
        return _aggregate(getattr(policy, "policy_id", "custom"), curves, ck)

    policy_id, params = (policy, None) if isinstance(policy, str) else policy
    arm_specs = tuple((a.kind, a.mean, a.variance) for a in env.arms)
    tasks = [
        (arm_specs, policy_id, params, horizon, master_seed, lo, hi, ck.tolist())
        for lo, hi in _chunk_bounds(runs)
    ]
    curves = np.empty((runs, len(ck)), dtype=np.float64)
    if threads <= 1 or len(tasks) == 1:
        results = map(_simulate_chunk, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=min(threads, len(tasks)))
        try:
            results = list(pool.map(_simulate_chunk, tasks))
        finally:
            pool.shutdown()
    for lo, chunk_curves, _pulls, _survivors in results:
        curves[lo:lo + chunk_curves.shape[0]] = chunk_curves
    return _aggregate(policy_id, curves, ck)


def _reward_stream(master_seed: int, run_index: int) -> RngStream:
    from .env import derive_run_stream

    return derive_run_stream(master_seed, run_index, DOMAIN_REWARDS)


def _policy_stream(master_seed: int, run_index: int) -> StreamBatch:
    return StreamBatch.for_runs(master_seed, [run_index], DOMAIN_POLICY)


def _aggregate(policy_id: str, curves: np.ndarray, ck: np.ndarray) -> AggregateCurve:
    runs = curves.shape[0]
    mean = curves.mean(axis=0)
    if runs > 1:
        stderr = curves.std(axis=0, ddof=1) / np.sqrt(runs)
    else:
        stderr = np.zeros_like(mean)
    return AggregateCurve(policy_id, runs, ck, mean, stderr)
