"""Property-based invariants (hypothesis)."""

from __future__ import annotations

import warnings

import numpy as np
from hypothesis import given, settings, strategies as st

import oracles
from eucbv.env import derive_run_stream, make_environment
from eucbv.policies import make_policy
from eucbv.policies.eucbv import EucbvPolicy, confidence_radius
from eucbv.policies.kl import klucb_index
from eucbv.rng import RngStream, StreamBatch, _mix64_np, derive_key, mix64
from eucbv.simulator import run_once
from eucbv.stats import ArmStats, record

_SETTINGS = settings(max_examples=200, deadline=None)

rewards_01 = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=300
)


@_SETTINGS
@given(rewards_01)
def test_variance_matches_two_pass_oracle(rewards):
    stats = ArmStats()
    for r in rewards:
        stats = record(stats, r)
    assert abs(stats.variance() - oracles.two_pass_variance(rewards)) <= 1e-10


@_SETTINGS
@given(rewards_01)
def test_variance_bounded_by_quarter_on_unit_interval(rewards):
    stats = ArmStats()
    for r in rewards:
        stats = record(stats, r)
    assert 0.0 <= stats.variance() <= 0.25 + 1e-12


@_SETTINGS
@given(rewards_01, st.randoms(use_true_random=False))
def test_estimates_permutation_invariant(rewards, rnd):
    shuffled = list(rewards)
    rnd.shuffle(shuffled)
    a, b = ArmStats(), ArmStats()
    for r in rewards:
        a = record(a, r)
    for r in shuffled:
        b = record(b, r)
    assert abs(a.mean() - b.mean()) <= 1e-12
    assert abs(a.variance() - b.variance()) <= 1e-10


@_SETTINGS
@given(st.integers(min_value=0, max_value=2 ** 64 - 1))
def test_mix64_scalar_matches_vector(z):
    assert mix64(z) == int(_mix64_np(np.array([z], dtype=np.uint64))[0])


@_SETTINGS
@given(st.integers(min_value=0, max_value=2 ** 63), st.integers(min_value=0, max_value=1000))
def test_stream_reproducible_and_count_independent(seed, run):
    first = derive_run_stream(seed, run).uniforms(32)
    again = derive_run_stream(seed, run).uniforms(32)
    assert np.array_equal(first, again)
    batch = StreamBatch.for_runs(seed, range(run, run + 5))
    assert np.array_equal(batch.uniform_block(32)[0], first)


@_SETTINGS
@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.integers(min_value=1, max_value=10 ** 5),
    st.integers(min_value=1, max_value=10 ** 7),
)
def test_klucb_index_bracketed(mean, pulls, t):
    t = max(t, pulls)
    idx = float(klucb_index(mean, pulls, t))
    assert mean - 1e-12 <= idx <= 1.0


@_SETTINGS
@given(
    st.lists(st.integers(min_value=0, max_value=7), min_size=8, max_size=8),
    st.sampled_from([-2.0, -0.5, 0.5, 1.0, 4.0]),
)
def test_select_scale_free_in_means(eighths, shift):
    # Dyadic rewards and shifts keep every float operation exact, so the
    # argmax must be literally identical after shifting all rewards.
    base = [x / 8.0 for x in eighths]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = EucbvPolicy(1, 4, 100)
        b = EucbvPolicy(1, 4, 100)
    for r in base:  # round-robin so every arm is pulled before elimination
        for arm in range(4):
            a.update(np.array([arm]), np.array([r]))
            b.update(np.array([arm]), np.array([r + shift]))
    assert a.select(33)[0] == b.select(33)[0]


def _random_bernoulli_env(rnd):
    k = rnd.randint(2, 5)
    means = [rnd.randint(0, 100) / 100.0 for _ in range(k)]
    return make_environment([("bernoulli", m) for m in means])


@_SETTINGS
@given(st.randoms(use_true_random=False), st.integers(min_value=0, max_value=10 ** 6))
def test_eucbv_simulation_invariants(rnd, seed):
    env = _random_bernoulli_env(rnd)
    k = env.n_arms
    horizon = rnd.randint(k + 1, 160)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        policy = make_policy("eucbv", k, horizon)
    rng = derive_run_stream(seed, 0)
    gaps = env.gaps
    state = policy._p.state
    regret = 0.0
    prev_regret = 0.0
    pull_log = []
    from eucbv.env import sample_reward

    for t in range(1, horizon + 1):
        arm = policy.select(t)
        assert state.active[0].any()
        if t > k:
            assert state.active[0, arm], "pulled an eliminated arm"
        reward = sample_reward(env.arms[arm], rng)
        policy.update(arm, reward)
        pull_log.append(arm)
        assert state.epsilon[0] == 2.0 ** -state.m[0]
        assert state.m[0] <= state.max_rounds + 1
        regret += gaps[arm]
        assert regret >= prev_regret >= 0.0
        prev_regret = regret
    pulls = policy.pull_counts()
    assert pulls.sum() == horizon
    assert abs(float(gaps @ pulls) - regret) < 1e-9
    # eliminated arms never pulled again
    dead = np.nonzero(~state.active[0])[0]
    for arm in dead:
        last = max(i for i, a in enumerate(pull_log) if a == arm)
        stayed_dead = [i for i, a in enumerate(pull_log) if a == arm and i > last]
        assert not stayed_dead


@_SETTINGS
@given(st.randoms(use_true_random=False), st.integers(min_value=0, max_value=10 ** 6))
def test_run_once_invariants_for_index_policies(rnd, seed):
    env = _random_bernoulli_env(rnd)
    horizon = rnd.randint(env.n_arms, 120)
    pid = rnd.choice(["ucb1", "moss", "ucbv", "ocucb", "dmed"])
    policy = make_policy(pid, env.n_arms, horizon)
    trace = run_once(env, policy, horizon, derive_run_stream(seed, 1))
    assert trace.pulls.sum() == horizon
    assert (np.diff(trace.regret_curve) >= -1e-12).all()
    assert trace.regret_curve[0] >= 0.0
    assert abs(trace.regret_curve[-1] - float(env.gaps @ trace.pulls)) < 1e-9


@_SETTINGS
@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.integers(min_value=1, max_value=10 ** 6),
    st.floats(min_value=0.0, max_value=20.0),
    st.floats(min_value=0.01, max_value=2.0),
)
def test_confidence_radius_monotonicity(v_hat, pulls, log_term, rho):
    base = confidence_radius(v_hat, pulls, log_term, rho)
    assert confidence_radius(v_hat, pulls + 1, log_term, rho) <= base + 1e-15
    assert confidence_radius(v_hat + 0.1, pulls, log_term, rho) >= base - 1e-15


@_SETTINGS
@given(st.integers(min_value=0, max_value=2 ** 32), st.floats(min_value=0, max_value=1))
def test_bernoulli_reward_support(seed, p):
    rng = RngStream(derive_key(seed, 0))
    assert rng.bernoulli(p) in (0.0, 1.0)
