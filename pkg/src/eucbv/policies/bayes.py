"""Posterior-sampling and posterior-quantile baselines.

TS-Beta     Beta(1, 1) prior over {0, 1} rewards; a non-binary reward is
            Bernoulli-rounded by one coin flip with probability equal to the
            reward clamped to [0, 1] (binary rewards consume no flip).
TS-Gauss    N(0, 1) prior with unit observation noise: after z pulls with
            reward sum S the posterior is N(S / (1 + z), 1 / (1 + z)).
Bayes-UCB   posterior quantile at level 1 - 1/(t ln T); prior "beta" uses the
            Beta posterior over rewards accumulated clamped to [0, 1], prior
            "gauss" uses the same Gaussian posterior as TS-Gauss.

TS policies consume their own random stream; Bayes-UCB is deterministic.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import betaincinv, ndtri

from .base import BatchPolicy


class TsBetaPolicy(BatchPolicy):
    policy_id = "ts-beta"

    def __init__(self, n_runs, n_arms, horizon, rng=None):
        super().__init__(n_runs, n_arms, horizon, rng)
        if rng is None:
            raise ValueError("ts-beta needs a policy random stream")
        self.successes = np.zeros((n_runs, n_arms), dtype=np.float64)
        self.failures = np.zeros((n_runs, n_arms), dtype=np.float64)

    def _select(self, t):
        samples = self.rng.beta_block(self.successes + 1.0, self.failures + 1.0)
        return np.argmax(samples, axis=1)

    def _after_update(self, t, arms, rewards):
        binary = (rewards == 0.0) | (rewards == 1.0)
        outcomes = rewards.copy()
        lanes = np.nonzero(~binary)[0]
        if lanes.size:
            u = self.rng.uniform_lanes(lanes)
            outcomes[lanes] = (u < np.clip(rewards[lanes], 0.0, 1.0)).astype(np.float64)
        rows = np.arange(self.n_runs)
        self.successes[rows, arms] += outcomes
        self.failures[rows, arms] += 1.0 - outcomes


class TsGaussPolicy(BatchPolicy):
    policy_id = "ts-gauss"

    def __init__(self, n_runs, n_arms, horizon, rng=None):
        super().__init__(n_runs, n_arms, horizon, rng)
        if rng is None:
            raise ValueError("ts-gauss needs a policy random stream")

    def _select(self, t):
        precision = 1.0 + self.stats.counts
        post_mean = self.stats.sums / precision
        post_sd = 1.0 / np.sqrt(precision)
        samples = post_mean + post_sd * self.rng.normal_block(self.n_arms)
        return np.argmax(samples, axis=1)


class BayesUcbPolicy(BatchPolicy):
    policy_id = "bayes-ucb"

    def __init__(self, n_runs, n_arms, horizon, rng=None, prior: str = "beta"):
        super().__init__(n_runs, n_arms, horizon, rng)
        if prior not in ("beta", "gauss"):
            raise ValueError(f"bayes-ucb prior must be 'beta' or 'gauss', got {prior!r}")
        self.prior = prior
        self._log_horizon = math.log(horizon)
        if prior == "beta":
            self.successes = np.zeros((n_runs, n_arms), dtype=np.float64)

    def _select(self, t):
        level = 1.0 - 1.0 / (t * self._log_horizon)
        if self.prior == "beta":
            a = self.successes + 1.0
            b = self.stats.counts - self.successes + 1.0
            scores = betaincinv(a, b, level)
        else:
            precision = 1.0 + self.stats.counts
            scores = self.stats.sums / precision + ndtri(level) / np.sqrt(precision)
        return np.argmax(scores, axis=1)

    def _after_update(self, t, arms, rewards):
        if self.prior == "beta":
            rows = np.arange(self.n_runs)
            self.successes[rows, arms] += np.clip(rewards, 0.0, 1.0)
