"""Policy registry and the scalar index dispatcher.

Registered policy ids: eucbv, ucb1, ucbv, moss, ocucb, klucb-plus, ts-beta,
ts-gauss, bayes-ucb, dmed, ucb-improved, median-elim.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import betaincinv, ndtri

from ..rng import RngStream, StreamBatch
from ..stats import ArmStats, UndefinedEstimateError
from .base import BatchPolicy, LoopBatch, SingleRunAdapter
from .bayes import BayesUcbPolicy, TsBetaPolicy, TsGaussPolicy
from .eucbv import (
    EucbvPolicy,
    EucbvState,
    confidence_radius,
    eucbv_advance_round,
    eucbv_confidence,
    eucbv_eliminate,
    eucbv_init,
    eucbv_select,
    eucbv_step,
    record_init_pull,
)
from .indexes import (
    MossPolicy,
    OcucbPolicy,
    Ucb1Policy,
    UcbvPolicy,
    moss_index,
    ocucb_index,
    ucb1_index,
    ucbv_index,
)
from .kl import KlUcbPlusPolicy, kl_bernoulli, klucb_index
from .rounds import DmedBatchPolicy, DmedPolicy, MedianElimPolicy, UcbImprovedPolicy

_BATCHED = {
    "eucbv": EucbvPolicy,
    "ucb1": Ucb1Policy,
    "ucbv": UcbvPolicy,
    "moss": MossPolicy,
    "ocucb": OcucbPolicy,
    "klucb-plus": KlUcbPlusPolicy,
    "ts-beta": TsBetaPolicy,
    "ts-gauss": TsGaussPolicy,
    "bayes-ucb": BayesUcbPolicy,
    "dmed": DmedBatchPolicy,
}

_SCALAR = {
    "ucb-improved": UcbImprovedPolicy,
    "median-elim": MedianElimPolicy,
}

POLICY_IDS = tuple(sorted((*_BATCHED, *_SCALAR)))

# Per-policy constructor parameters accepted from configs.
PARAM_SPECS = {
    "eucbv": {"rho": float, "psi": float, "radius_eps_power": int},
    "ocucb": {"alpha": float, "psi": float},
    "bayes-ucb": {"prior": str},
    "median-elim": {"epsilon": float, "delta": float},
}

# Policies that draw from their own random stream.
RANDOMIZED = ("ts-beta", "ts-gauss")


def validate_params(policy_id: str, params: dict) -> dict:
    """Type-check config parameters; unknown keys are errors."""
    if policy_id not in POLICY_IDS:
        raise ValueError(f"unknown policy id {policy_id!r} (known: {', '.join(POLICY_IDS)})")
    spec = PARAM_SPECS.get(policy_id, {})
    out = {}
    for key, value in (params or {}).items():
        if key not in spec:
            raise ValueError(f"policy {policy_id!r} does not accept parameter {key!r}")
        out[key] = spec[key](value)
    return out


def make_batch_policy(policy_id: str, n_runs: int, n_arms: int, horizon: int,
                      params: dict | None = None, rng=None):
    """Instantiate a batched policy (one independent lane per run)."""
    params = validate_params(policy_id, params or {})
    if policy_id in _BATCHED:
        return _BATCHED[policy_id](n_runs, n_arms, horizon, rng=rng, **params)
    cls = _SCALAR[policy_id]
    return LoopBatch([cls(n_arms, horizon, **params) for _ in range(n_runs)])


def make_policy(policy_id: str, n_arms: int, horizon: int,
                params: dict | None = None, rng=None):
    """Instantiate a single-run policy satisfying the sequential contract."""
    params = validate_params(policy_id, params or {})
    if policy_id in _SCALAR:
        return _SCALAR[policy_id](n_arms, horizon, **params)
    batch = _BATCHED[policy_id](1, n_arms, horizon, rng=rng, **params)
    return SingleRunAdapter(batch)


def baseline_index(policy_kind: str, stats: ArmStats, t: int, horizon: int,
                   n_arms: int, params: dict | None = None) -> float:
    """Scalar index of one arm under a baseline index policy.

    Randomized kinds (ts-beta, ts-gauss) return a posterior sample and need
    ``params["rng"]``.  Round-structured policies (dmed, ucb-improved,
    median-elim) have no per-arm index and are rejected.
    """
    params = dict(params or {})
    if policy_kind in _SCALAR:
        raise ValueError(f"{policy_kind!r} is round-structured and has no arm index")
    if policy_kind in ("ts-beta", "ts-gauss") and "rng" not in params:
        raise ValueError(f"{policy_kind!r} needs params['rng'] to sample")
    if stats.pulls == 0 and policy_kind not in ("ts-beta", "ts-gauss"):
        raise UndefinedEstimateError(f"{policy_kind!r} index undefined before the first pull")
    if policy_kind == "ucb1":
        return float(ucb1_index(stats.mean(), stats.pulls, t))
    if policy_kind == "ucbv":
        return float(ucbv_index(stats.mean(), stats.variance(), stats.pulls, t))
    if policy_kind == "moss":
        return float(moss_index(stats.mean(), stats.pulls, horizon, n_arms))
    if policy_kind == "ocucb":
        return float(ocucb_index(stats.mean(), stats.pulls, horizon,
                                 params.get("alpha", 3.0), params.get("psi", 2.0)))
    if policy_kind == "klucb-plus":
        return float(klucb_index(stats.mean(), stats.pulls, t))
    if policy_kind == "bayes-ucb":
        level = 1.0 - 1.0 / (t * math.log(horizon))
        if params.get("prior", "beta") == "gauss":
            precision = 1.0 + stats.pulls
            return float(stats.reward_sum / precision + ndtri(level) / math.sqrt(precision))
        s = min(max(stats.reward_sum, 0.0), float(stats.pulls))
        return float(betaincinv(s + 1.0, stats.pulls - s + 1.0, level))
    if policy_kind == "ts-beta":
        lane, orig = _as_lane(params["rng"])
        s = min(max(stats.reward_sum, 0.0), float(stats.pulls))
        sample = lane.beta_block(np.array([[s + 1.0]]), np.array([[stats.pulls - s + 1.0]]))
        if orig is not None:
            orig.counter = int(lane.counters[0])
        return float(sample[0, 0])
    if policy_kind == "ts-gauss":
        lane, orig = _as_lane(params["rng"])
        precision = 1.0 + stats.pulls
        z = float(lane.normal_block(1)[0, 0])
        if orig is not None:
            orig.counter = int(lane.counters[0])
        return float(stats.reward_sum / precision + z / math.sqrt(precision))
    raise ValueError(f"unknown policy id {policy_kind!r}")


def _as_lane(rng):
    """View an RngStream as a one-lane StreamBatch (returns the original for
    counter write-back), or pass a StreamBatch through."""
    if isinstance(rng, StreamBatch):
        return rng, None
    lane = StreamBatch(np.array([rng.key], dtype=np.uint64))
    lane.counters[0] = rng.counter
    return lane, rng


__all__ = [
    "POLICY_IDS",
    "RANDOMIZED",
    "BatchPolicy",
    "LoopBatch",
    "SingleRunAdapter",
    "EucbvPolicy",
    "EucbvState",
    "confidence_radius",
    "eucbv_init",
    "eucbv_confidence",
    "eucbv_select",
    "eucbv_eliminate",
    "eucbv_advance_round",
    "eucbv_step",
    "record_init_pull",
    "ucb1_index",
    "ucbv_index",
    "moss_index",
    "ocucb_index",
    "kl_bernoulli",
    "klucb_index",
    "baseline_index",
    "make_policy",
    "make_batch_policy",
    "validate_params",
]
