"""Replication harness: regret accounting, determinism, aggregation."""

from __future__ import annotations

import numpy as np
import pytest

from eucbv.env import derive_run_stream, make_environment
from eucbv.policies import make_policy
from eucbv.rng import DOMAIN_REWARDS, StreamBatch
from eucbv.simulator import (
    checkpoint_times,
    run_batch,
    run_many,
    run_once,
)
from eucbv.policies import make_batch_policy


class _FixedArmPolicy:
    """Always pulls one arm (test stub satisfying the policy contract)."""

    policy_id = "fixed"

    def __init__(self, arm):
        self.arm = arm

    def select(self, t):
        return self.arm

    def update(self, arm, reward):
        pass


class _RoundRobinPolicy:
    policy_id = "round-robin"

    def __init__(self, n_arms):
        self.n_arms = n_arms

    def select(self, t):
        return (t - 1) % self.n_arms

    def update(self, arm, reward):
        pass


def _expt1_env():
    return make_environment([("bernoulli", 0.07)] * 19 + [("bernoulli", 0.1)])


class TestCheckpointTimes:
    def test_short_horizon_keeps_every_step(self):
        assert checkpoint_times(5, 200).tolist() == [1, 2, 3, 4, 5]

    def test_final_step_always_included(self):
        for horizon in (201, 1000, 59999, 60000):
            ts = checkpoint_times(horizon, 200)
            assert ts[-1] == horizon
            assert len(ts) <= 200
            assert (np.diff(ts) > 0).all()


class TestRunOnce:
    def test_oracle_policy_zero_regret(self):
        env = _expt1_env()
        trace = run_once(env, _FixedArmPolicy(19), 1000, derive_run_stream(1, 0))
        assert np.all(trace.regret_curve == 0.0)

    def test_fixed_suboptimal_arm_linear_regret(self):
        env = _expt1_env()
        trace = run_once(env, _FixedArmPolicy(0), 1000, derive_run_stream(1, 0))
        assert trace.regret_curve[-1] == pytest.approx(1000 * 0.03)

    def test_round_robin_closed_form(self):
        # 20000 pulls spread over 20 arms: 19000 pulls on gap-0.03 arms -> 570.
        env = _expt1_env()
        trace = run_once(env, _RoundRobinPolicy(20), 20000, derive_run_stream(1, 0))
        assert trace.regret_curve[-1] == pytest.approx(570.0)

    def test_trace_invariants(self):
        env = _expt1_env()
        policy = make_policy("ucb1", env.n_arms, 500)
        trace = run_once(env, policy, 500, derive_run_stream(2, 0))
        assert trace.pulls.sum() == 500
        assert (np.diff(trace.regret_curve) >= -1e-12).all()
        assert (trace.regret_curve >= 0).all()
        recomputed = float(env.gaps @ trace.pulls)
        assert abs(trace.regret_curve[-1] - recomputed) < 1e-9

    def test_horizon_smaller_than_arms_rejected(self):
        env = _expt1_env()
        with pytest.raises(ValueError):
            run_once(env, _FixedArmPolicy(0), 10, derive_run_stream(1, 0))


class TestBatchEquivalence:
    @pytest.mark.parametrize("pid", ["eucbv", "ucb1", "moss", "ts-beta", "dmed"])
    def test_run_alone_equals_run_in_batch(self, pid):
        env = _expt1_env()
        horizon, seed, runs = 400, 77, 8
        ck = checkpoint_times(horizon, horizon)
        reward_streams = StreamBatch.for_runs(seed, range(runs), DOMAIN_REWARDS)
        policy_streams = StreamBatch.for_runs(seed, range(runs), domain=1)
        batch = make_batch_policy(pid, runs, env.n_arms, horizon, rng=policy_streams)
        curves, pulls, _ = run_batch(env, batch, horizon, reward_streams, ck)
        for k in (0, 3, 7):
            single = make_policy(
                pid, env.n_arms, horizon,
                rng=StreamBatch.for_runs(seed, [k], domain=1),
            )
            trace = run_once(env, single, horizon, derive_run_stream(seed, k))
            assert np.array_equal(trace.regret_curve[ck - 1], curves[k])
            assert np.array_equal(trace.pulls, pulls[k])


class TestRunMany:
    def test_single_run_mean_equals_trace(self):
        env = _expt1_env()
        agg = run_many(env, ("ucb1", None), 300, 1, 5)
        policy = make_policy("ucb1", env.n_arms, 300)
        trace = run_once(env, policy, 300, derive_run_stream(5, 0))
        ck = agg.checkpoint_ts
        assert np.array_equal(agg.mean_regret, trace.regret_curve[ck - 1])
        assert np.all(agg.stderr_regret == 0.0)

    def test_forced_identical_seeds_zero_stderr(self):
        env = _expt1_env()

        class _SameStream:
            policy_id = "same-stream"

            def __call__(self, n_arms, horizon, rng):
                return make_policy("ucb1", n_arms, horizon)

        # run the same replication twice by deriving identical reward streams
        curves = []
        for _ in range(2):
            policy = make_policy("ucb1", env.n_arms, 200)
            trace = run_once(env, policy, 200, derive_run_stream(9, 0))
            curves.append(trace.regret_curve)
        stacked = np.stack(curves)
        assert np.array_equal(stacked[0], stacked[1])
        assert stacked.std(axis=0, ddof=1).max() == 0.0

    def test_runs_must_be_positive(self):
        with pytest.raises(ValueError):
            run_many(_expt1_env(), ("ucb1", None), 100, 0, 1)

    def test_threads_do_not_change_aggregates(self):
        env = _expt1_env()
        serial = run_many(env, ("moss", None), 600, 120, 11, threads=1)
        parallel = run_many(env, ("moss", None), 600, 120, 11, threads=2)
        assert np.array_equal(serial.mean_regret, parallel.mean_regret)
        assert np.array_equal(serial.stderr_regret, parallel.stderr_regret)

    def test_callable_factory_path(self):
        env = _expt1_env()

        def factory(n_arms, horizon, rng):
            return _FixedArmPolicy(env.optimal_index)

        factory.policy_id = "oracle"
        agg = run_many(env, factory, 150, 3, 13)
        assert agg.policy_id == "oracle"
        assert np.all(agg.mean_regret == 0.0)
        assert agg.run_count == 3

    def test_aggregate_matches_manual_reduction(self):
        env = _expt1_env()
        runs, horizon, seed = 7, 250, 21
        agg = run_many(env, ("ucbv", None), horizon, runs, seed)
        ck = agg.checkpoint_ts
        curves = []
        for k in range(runs):
            policy = make_policy("ucbv", env.n_arms, horizon)
            trace = run_once(env, policy, horizon, derive_run_stream(seed, k))
            curves.append(trace.regret_curve[ck - 1])
        stacked = np.stack(curves)
        assert np.array_equal(agg.mean_regret, stacked.mean(axis=0))
        assert np.allclose(agg.stderr_regret,
                           stacked.std(axis=0, ddof=1) / np.sqrt(runs))

    def test_mean_curve_non_decreasing(self):
        env = _expt1_env()
        agg = run_many(env, ("ucb1", None), 500, 5, 31)
        assert (np.diff(agg.mean_regret) >= -1e-12).all()
