"""Sequential policy contracts.

A policy sees timesteps t = 1..T.  For t <= K every policy pulls arm t-1
(the initialization pulls, which count toward all statistics); from t = K+1
it selects according to its rule.  Batched classes run one independent policy
instance per lane; lane r's trajectory is identical to running that lane
alone because no computation couples lanes.
"""

from __future__ import annotations

import numpy as np

from ..stats import PullStats


class BatchPolicy:
    """Base for lockstep-batched policies (one lane per replication)."""

    policy_id = "?"

    def __init__(self, n_runs: int, n_arms: int, horizon: int, rng=None):
        if n_arms < 2:
            raise ValueError("policies need at least 2 arms")
        if horizon < n_arms:
            raise ValueError("horizon must cover the initialization pulls")
        self.n_runs = n_runs
        self.n_arms = n_arms
        self.horizon = horizon
        self.rng = rng
        self.stats = PullStats(n_runs, n_arms)
        self._t = 0

    def select(self, t: int) -> np.ndarray:
        """Arm choice per lane at timestep t (1-based)."""
        if t <= self.n_arms:
            return np.full(self.n_runs, t - 1, dtype=np.int64)
        return self._select(t)

    def update(self, arms: np.ndarray, rewards: np.ndarray) -> None:
        """Record one observation per lane."""
        self.stats.record(arms, rewards)
        self._t += 1
        self._after_update(self._t, arms, rewards)

    def survivors(self) -> np.ndarray:
        """Surviving arm per lane for eliminating policies, else -1."""
        return np.full(self.n_runs, -1, dtype=np.int64)

    def pull_counts(self) -> np.ndarray:
        return self.stats.pull_counts()

    def _select(self, t: int) -> np.ndarray:
        raise NotImplementedError

    def _after_update(self, t: int, arms: np.ndarray, rewards: np.ndarray) -> None:
        pass


class LoopBatch:
    """Batch adapter over per-run scalar policies (for queue/round-robin
    policies whose per-step work is O(1) and control flow diverges by run)."""

    def __init__(self, members):
        self.members = list(members)
        self.n_runs = len(self.members)
        self.n_arms = self.members[0].n_arms
        self.policy_id = self.members[0].policy_id

    def select(self, t: int) -> np.ndarray:
        return np.fromiter(
            (m.select(t) for m in self.members), dtype=np.int64, count=self.n_runs
        )

    def update(self, arms: np.ndarray, rewards: np.ndarray) -> None:
        rlist = rewards.tolist()
        for m, a, r in zip(self.members, arms.tolist(), rlist):
            m.update(a, r)

    def survivors(self) -> np.ndarray:
        out = np.full(self.n_runs, -1, dtype=np.int64)
        for i, m in enumerate(self.members):
            s = m.survivor()
            if s is not None:
                out[i] = s
        return out

    def pull_counts(self) -> np.ndarray:
        return np.stack([m.pull_counts() for m in self.members])


class SingleRunAdapter:
    """Scalar select/update view over a one-lane batch policy.

    Satisfies the single-run policy contract: init happens at construction,
    then exactly T select/update pairs.
    """

    def __init__(self, batch_policy):
        if batch_policy.n_runs != 1:
            raise ValueError("SingleRunAdapter requires a one-lane policy")
        self._p = batch_policy
        self.policy_id = batch_policy.policy_id
        self.n_arms = batch_policy.n_arms

    def select(self, t: int) -> int:
        return int(self._p.select(t)[0])

    def update(self, arm: int, reward: float) -> None:
        self._p.update(np.array([arm], dtype=np.int64),
                       np.array([reward], dtype=np.float64))

    def survivor(self):
        s = int(self._p.survivors()[0])
        return None if s < 0 else s

    def pull_counts(self) -> np.ndarray:
        return self._p.pull_counts()[0]
