"""Arm reward models and bandit environments.

Arms are Bernoulli or Gaussian with known means, so the simulator can account
pseudo-regret exactly.  Gaussian samples are deliberately NOT clipped to
[0, 1] even though the algorithms' analyses assume bounded rewards: the
Gaussian experiment testbeds run the algorithms on unbounded samples, and
clipping would shift every mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import DOMAIN_REWARDS, RngStream, StreamBatch, derive_key

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"
_KINDS = (BERNOULLI, GAUSSIAN)


@dataclass(frozen=True)
class ArmModel:
    """One arm's reward distribution with known mean and variance."""

    kind: str
    mean: float
    variance: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown arm kind {self.kind!r}")
        if self.kind == BERNOULLI:
            if not 0.0 <= self.mean <= 1.0:
                raise ValueError(f"Bernoulli mean must be in [0, 1], got {self.mean}")
            expected = self.mean * (1.0 - self.mean)
            if self.variance != expected:
                raise ValueError(
                    f"Bernoulli variance must equal mean*(1-mean)={expected}, got {self.variance}"
                )
        elif self.variance < 0.0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")

    @classmethod
    def bernoulli(cls, mean: float) -> "ArmModel":
        return cls(BERNOULLI, float(mean), float(mean) * (1.0 - float(mean)))

    @classmethod
    def gaussian(cls, mean: float, variance: float) -> "ArmModel":
        return cls(GAUSSIAN, float(mean), float(variance))


@dataclass(frozen=True)
class Environment:
    """An ordered set of arms with gap accounting.

    ``optimal_index`` is the lowest index attaining the maximal mean; all
    co-maximal arms have gap exactly 0.  Immutable and safe to share.
    """

    arms: tuple
    means: np.ndarray = field(repr=False)
    variances: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    optimal_index: int

    @property
    def n_arms(self) -> int:
        return len(self.arms)


def make_environment(spec) -> Environment:
    """Build an Environment from ArmModels or (kind, mean[, variance]) tuples.

    Rejects K < 2, Bernoulli means outside [0, 1], and negative variances.
    For Bernoulli entries a supplied variance must equal mean*(1-mean); pass
    None (or omit it) to have it derived.
    """
    arms = []
    for entry in spec:
        if isinstance(entry, ArmModel):
            arms.append(entry)
            continue
        kind, mean, *rest = entry
        variance = rest[0] if rest else None
        if kind == BERNOULLI and variance is None:
            arms.append(ArmModel.bernoulli(mean))
        elif variance is None:
            raise ValueError(f"{kind} arm requires an explicit variance")
        else:
            arms.append(ArmModel(kind, float(mean), float(variance)))
    if len(arms) < 2:
        raise ValueError(f"an environment needs at least 2 arms, got {len(arms)}")
    means = np.array([a.mean for a in arms], dtype=np.float64)
    variances = np.array([a.variance for a in arms], dtype=np.float64)
    optimal = int(np.argmax(means))  # ties resolve to the lowest index
    gaps = means[optimal] - means
    return Environment(tuple(arms), means, variances, gaps, optimal)


def sample_reward(arm: ArmModel, rng: RngStream) -> float:
    """Draw one reward.  Bernoulli consumes 1 uniform, Gaussian exactly 2."""
    if arm.kind == BERNOULLI:
        return rng.bernoulli(arm.mean)
    return arm.mean + np.sqrt(arm.variance) * rng.normal()


def derive_run_stream(master_seed: int, run_index: int,
                      domain: int = DOMAIN_REWARDS) -> RngStream:
    """Reward stream for replication ``run_index`` under ``master_seed``.

    A fixed hash of (master_seed, run_index): the same pair always yields the
    same stream, regardless of how many runs an experiment requests.
    """
    return RngStream(derive_key(master_seed, run_index, domain))


def sample_rewards_batch(env: Environment, arms: np.ndarray,
                         streams: StreamBatch) -> np.ndarray:
    """One reward per lane for the chosen arms, consuming each lane's stream
    exactly as :func:`sample_reward` would."""
    kinds = {a.kind for a in env.arms}
    if kinds == {BERNOULLI}:
        u = streams.uniform_each()
        return (u < env.means[arms]).astype(np.float64)
    if kinds == {GAUSSIAN}:
        z = streams.normal_each()
        return env.means[arms] + np.sqrt(env.variances[arms]) * z
    # Mixed-kind environment: lane draw counts differ by arm kind.
    rewards = np.empty(arms.shape[0], dtype=np.float64)
    is_bern = np.array([a.kind == BERNOULLI for a in env.arms])[arms]
    lanes_b = np.nonzero(is_bern)[0]
    lanes_g = np.nonzero(~is_bern)[0]
    if lanes_b.size:
        u = streams.uniform_lanes(lanes_b)
        rewards[lanes_b] = (u < env.means[arms[lanes_b]]).astype(np.float64)
    if lanes_g.size:
        u1 = streams.uniform_lanes(lanes_g)
        u2 = streams.uniform_lanes(lanes_g)
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        rewards[lanes_g] = env.means[arms[lanes_g]] + np.sqrt(env.variances[arms[lanes_g]]) * z
    return rewards
