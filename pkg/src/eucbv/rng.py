"""Counter-based pseudo-random streams with reproducible, portable output.

Every stream is addressed by a 64-bit ``key``; draw number ``j`` (1-based) is

    out_j = mix64((key + j * GOLDEN) mod 2**64)

where ``mix64`` is the splitmix64 output finalizer and ``GOLDEN`` is the
64-bit golden-ratio increment.  Because each draw is a pure function of
``(key, j)``, a stream produces the same values no matter how its draws are
batched, and distinct streams never interact.  Uniforms take the top 53 bits
of ``out_j``; normals use the Box-Muller transform and consume exactly two
uniforms each.

Stream keys are derived by hashing ``(master_seed, run_index, domain)``, so
replication ``k`` of an experiment gets the same reward stream whether 10 or
10000 runs are requested, and policy-internal randomness (domain 1) never
collides with reward draws (domain 0).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi

# Stream domains: rewards, policy-internal randomness, environment generation.
DOMAIN_REWARDS = 0
DOMAIN_POLICY = 1
DOMAIN_ENV_GEN = 2

_NP_GOLDEN = np.uint64(_GOLDEN)
_NP_MIX_A = np.uint64(_MIX_A)
_NP_MIX_B = np.uint64(_MIX_B)
_NP_30 = np.uint64(30)
_NP_27 = np.uint64(27)
_NP_31 = np.uint64(31)
_NP_11 = np.uint64(11)


def mix64(z: int) -> int:
    """splitmix64 output finalizer on a Python integer (mod 2**64)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorized mix64 on uint64 arrays; bit-identical to :func:`mix64`."""
    z = (z ^ (z >> _NP_30)) * _NP_MIX_A
    z = (z ^ (z >> _NP_27)) * _NP_MIX_B
    return z ^ (z >> _NP_31)


def derive_key(master_seed: int, run_index: int, domain: int = DOMAIN_REWARDS) -> int:
    """Hash (master_seed, run_index, domain) into a stream key.

    Each mix64 is a bijection, so distinct run indices (or domains) under one
    master seed always map to distinct keys.
    """
    if run_index < 0:
        raise ValueError("run_index must be >= 0")
    return mix64(mix64(mix64(master_seed & _MASK64) ^ (run_index & _MASK64)) ^ domain)


def _uniforms_from(key: np.uint64, start: int, n: int) -> np.ndarray:
    """Uniforms for draw indices start+1 .. start+n of the stream ``key``."""
    js = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    bits = _mix64_np(key + js * _NP_GOLDEN)
    return (bits >> _NP_11) * _INV_2_53


class RngStream:
    """A single counter-based stream (one owner; never shared).

    ``counter`` records how many draws have been consumed; replaying from the
    same key always yields the same sequence.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & _MASK64
        self.counter = counter

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        return cls(mix64(seed))

    def uniform(self) -> float:
        """One uniform draw in [0, 1)."""
        self.counter += 1
        bits = mix64((self.key + self.counter * _GOLDEN) & _MASK64)
        return (bits >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniform draws as a float64 array (same values as n calls)."""
        out = _uniforms_from(np.uint64(self.key), self.counter, n)
        self.counter += n
        return out

    def bernoulli(self, p: float) -> float:
        """A {0.0, 1.0} draw with P(1)=p.  Consumes exactly 1 uniform."""
        return 1.0 if self.uniform() < p else 0.0

    def normal(self) -> float:
        """A standard normal via Box-Muller.  Consumes exactly 2 uniforms.

        Uses numpy's log1p/cos so scalar and batched paths agree bitwise.
        """
        u1 = self.uniform()
        u2 = self.uniform()
        r = float(np.sqrt(-2.0 * np.log1p(-u1)))
        return r * float(np.cos(_TWO_PI * u2))


def derive_run_stream(master_seed: int, run_index: int,
                      domain: int = DOMAIN_REWARDS) -> RngStream:
    """Stream for one replication: a fixed hash of (master_seed, run_index).

    Independent of how many replications are requested and of execution
    order; ``domain`` separates reward draws from policy-internal draws.
    """
    return RngStream(derive_key(master_seed, run_index, domain))


class StreamBatch:
    """One counter-based stream per lane (lane = one replication).

    All draw methods advance only the counters of the lanes they draw for, so
    a lane's sequence of values is identical to running that lane's
    :class:`RngStream` alone.  That property is what makes batched execution
    bit-equivalent to serial per-run execution.
    """

    __slots__ = ("keys", "counters")

    def __init__(self, keys: np.ndarray):
        self.keys = np.asarray(keys, dtype=np.uint64)
        self.counters = np.zeros(self.keys.shape[0], dtype=np.uint64)

    @classmethod
    def for_runs(cls, master_seed: int, run_indices, domain: int = DOMAIN_REWARDS) -> "StreamBatch":
        keys = [derive_key(master_seed, int(k), domain) for k in run_indices]
        return cls(np.array(keys, dtype=np.uint64))

    def __len__(self) -> int:
        return self.keys.shape[0]

    def uniform_each(self) -> np.ndarray:
        """One uniform per lane; shape (R,)."""
        self.counters += np.uint64(1)
        bits = _mix64_np(self.keys + self.counters * _NP_GOLDEN)
        return (bits >> _NP_11) * _INV_2_53

    def uniform_lanes(self, lanes: np.ndarray) -> np.ndarray:
        """One uniform for each lane index in ``lanes`` only."""
        self.counters[lanes] += np.uint64(1)
        bits = _mix64_np(self.keys[lanes] + self.counters[lanes] * _NP_GOLDEN)
        return (bits >> _NP_11) * _INV_2_53

    def uniform_block(self, n: int) -> np.ndarray:
        """``n`` uniforms per lane; shape (R, n); lane r's draws are sequential."""
        js = self.counters[:, None] + np.arange(1, n + 1, dtype=np.uint64)[None, :]
        self.counters += np.uint64(n)
        bits = _mix64_np(self.keys[:, None] + js * _NP_GOLDEN)
        return (bits >> _NP_11) * _INV_2_53

    def normal_each(self) -> np.ndarray:
        """One standard normal per lane (2 uniforms each)."""
        u = self.uniform_block(2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        return r * np.cos(_TWO_PI * u[:, 1])

    def normal_block(self, n: int) -> np.ndarray:
        """``n`` standard normals per lane; shape (R, n); 2n uniforms per lane."""
        u = self.uniform_block(2 * n)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0::2]))
        return r * np.cos(_TWO_PI * u[:, 1::2])

    def _uniform_block_rows(self, rows: np.ndarray, n: int) -> np.ndarray:
        """``n`` uniforms for each lane in ``rows`` only; shape (len(rows), n)."""
        js = self.counters[rows, None] + np.arange(1, n + 1, dtype=np.uint64)[None, :]
        self.counters[rows] += np.uint64(n)
        bits = _mix64_np(self.keys[rows, None] + js * _NP_GOLDEN)
        return (bits >> _NP_11) * _INV_2_53

    def gamma_block(self, shape: np.ndarray) -> np.ndarray:
        """Gamma(shape, 1) per cell of an (R, C) shape array, shapes >= 1.

        Marsaglia-Tsang squeeze, one whole-row trial at a time: each pass a
        lane with any still-pending cell draws 3*C uniforms (u1 block, u2
        block, u3 block) and every cell re-tests; accepted cells keep their
        first accepted value.  A lane's total consumption therefore depends
        only on its own rejections, never on batch mates.
        """
        shape = np.asarray(shape, dtype=np.float64)
        if np.any(shape < 1.0):
            raise ValueError("gamma_block requires shape parameters >= 1")
        n_runs, n_cols = shape.shape
        d = shape - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty_like(d)
        pending = np.ones((n_runs, n_cols), dtype=bool)
        rows = np.arange(n_runs)
        with np.errstate(divide="ignore", invalid="ignore"):
            while rows.size:
                u = self._uniform_block_rows(rows, 3 * n_cols)
                x = np.sqrt(-2.0 * np.log1p(-u[:, :n_cols]))
                x *= np.cos(_TWO_PI * u[:, n_cols:2 * n_cols])
                dd = d[rows]
                v = (1.0 + c[rows] * x) ** 3
                accept = pending[rows] & (v > 0.0) & (
                    np.log(u[:, 2 * n_cols:]) < 0.5 * x * x + dd - dd * v
                    + dd * np.log(np.where(v > 0.0, v, 1.0))
                )
                sub_out = out[rows]
                np.copyto(sub_out, dd * v, where=accept)
                out[rows] = sub_out
                sub_pend = pending[rows] & ~accept
                pending[rows] = sub_pend
                rows = rows[sub_pend.any(axis=1)]
        return out

    def beta_block(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Beta(a, b) per cell, a,b >= 1, via the two-gamma ratio.

        Both gamma batches are drawn in one fused block (a's cells followed
        by b's within each trial row).
        """
        both = self.gamma_block(np.concatenate([a, b], axis=1))
        n_cols = a.shape[1]
        return both[:, :n_cols] / (both[:, :n_cols] + both[:, n_cols:])
