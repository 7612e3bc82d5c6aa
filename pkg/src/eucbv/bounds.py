"""Regret-bound calculators and numerical lemma verifiers.

The gap-dependent bound evaluated here is

    sum_{gap_i > b} [ C0*K^4/T^(1/4) + gap_i + 320*var_i*ln(T*gap_i^2/K)/gap_i ]
    + sum_{0 < gap_i <= b} C2*K^4/T^(1/4)
    + max_{0 < gap_i <= b} gap_i * T

valid for thresholds b >= sqrt(e/T); the gap-independent form is
C3*K^5/T^(1/4) + 80*sqrt(K*T).  C0, C2, C3 are unspecified integer constants
in the source analysis, so callers supply them (default 1) and outputs are
"up to unspecified constants".  Logs clamp at 0 when their argument <= 1.

The lemma verifiers evaluate the analysis' deterministic inequalities over
parameter grids and report violations instead of assuming them; the
concentration check estimates a one-sided deviation probability by Monte
Carlo and compares it against the stated bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import BERNOULLI, ArmModel, Environment
from .rng import RngStream

_LN2 = math.log(2.0)


def _clamped_log(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


@dataclass(frozen=True)
class BoundInputs:
    """Instance description consumed by the bound calculators.

    ``hardness_per_arm`` is H_i = sum over suboptimal arms j of
    min(1/gap_i^2, 1/gap_j^2); ``hardness`` is H_1 = sum 1/gap_i^2 (both over
    positive gaps only).
    """

    n_arms: int
    horizon: int
    gaps: tuple
    variances: tuple
    b: float
    sigma_max_sq: float = field(init=False)
    hardness: float = field(init=False)
    hardness_per_arm: tuple = field(init=False)

    def __post_init__(self):
        if self.n_arms < 2:
            raise ValueError("need at least 2 arms")
        if len(self.gaps) != self.n_arms or len(self.variances) != self.n_arms:
            raise ValueError("gaps and variances must have one entry per arm")
        if any(g < 0 for g in self.gaps):
            raise ValueError("gaps must be >= 0")
        floor = math.sqrt(math.e / self.horizon)
        if self.b < floor * (1.0 - 1e-12):
            raise ValueError(
                f"threshold b={self.b} violates the validity range b >= sqrt(e/T) = {floor}"
            )
        object.__setattr__(self, "sigma_max_sq", max(self.variances))
        pos = [g for g in self.gaps if g > 0.0]
        object.__setattr__(self, "hardness", sum(1.0 / g ** 2 for g in pos))
        per_arm = tuple(
            sum(min(1.0 / g ** 2, 1.0 / h ** 2) for h in pos) if g > 0.0 else 0.0
            for g in self.gaps
        )
        object.__setattr__(self, "hardness_per_arm", per_arm)

    @classmethod
    def from_environment(cls, env: Environment, horizon: int,
                         b: float | None = None) -> "BoundInputs":
        if b is None:
            b = math.sqrt(math.e / horizon)
        return cls(env.n_arms, horizon, tuple(env.gaps), tuple(env.variances), b)


def eucbv_dominant_term(gap: float, variance: float, n_arms: int, horizon: int) -> float:
    """The per-arm dominant term 320 * var * ln(T*gap^2/K) / gap (log clamped)."""
    if gap <= 0.0:
        raise ValueError("dominant term defined for positive gaps only")
    return 320.0 * variance * _clamped_log(horizon * gap * gap / n_arms) / gap


def eucbv_gap_dependent_bound(inputs: BoundInputs, c0: float = 1.0, c2: float = 1.0) -> float:
    """Evaluate the gap-dependent regret bound (up to the supplied constants)."""
    k4 = inputs.n_arms ** 4 / inputs.horizon ** 0.25
    total = 0.0
    small = [g for g in inputs.gaps if 0.0 < g <= inputs.b]
    for gap, var in zip(inputs.gaps, inputs.variances):
        if gap > inputs.b:
            total += c0 * k4 + gap + eucbv_dominant_term(gap, var, inputs.n_arms, inputs.horizon)
    total += len(small) * c2 * k4
    if small:
        total += max(small) * inputs.horizon
    return total


def gap_independent_bound(n_arms: int, horizon: int, c3: float = 1.0) -> float:
    """C3*K^5/T^(1/4) + 80*sqrt(K*T)."""
    if n_arms < 2 or horizon < 1:
        raise ValueError("need K >= 2 and T >= 1")
    return c3 * n_arms ** 5 / horizon ** 0.25 + 80.0 * math.sqrt(n_arms * horizon)


def table1_bounds(inputs: BoundInputs) -> list:
    """Comparison-table rows: (algorithm, gap_dependent, gap_independent).

    Evaluates each algorithm's bound functional form with every unspecified
    constant set to 1; Delta is the minimal positive gap.
    """
    K, T = inputs.n_arms, inputs.horizon
    pos = [g for g in inputs.gaps if g > 0.0]
    if not pos:
        raise ValueError("need at least one suboptimal arm")
    delta = min(pos)
    smax = inputs.sigma_max_sq
    ocucb_dep = sum(
        _clamped_log(T / h) / g
        for g, h in zip(inputs.gaps, inputs.hardness_per_arm)
        if g > 0.0
    )
    return [
        ("eucbv", K * smax * _clamped_log(T * delta ** 2 / K) / delta, math.sqrt(K * T)),
        ("moss", K ** 2 * _clamped_log(T * delta ** 2 / K) / delta, math.sqrt(K * T)),
        ("ocucb", ocucb_dep, math.sqrt(K * T)),
        ("ucb-improved", K * _clamped_log(T * delta ** 2) / delta,
         math.sqrt(K * T * math.log(K))),
        ("ucb1", K * math.log(T) / delta, math.sqrt(K * T * math.log(T))),
        ("ucbv", K * smax * math.log(T) / delta, math.sqrt(K * T * math.log(T))),
    ]


# ---------------------------------------------------------------------------
# Lemma verifiers


@dataclass(frozen=True)
class GridReport:
    """Outcome of sweeping an inequality over a parameter grid."""

    name: str
    points: int
    skipped: int
    violations: tuple
    worst_margin: float  # max of (lhs - rhs); <= 0 everywhere means it holds
    worst_point: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def default_k_grid() -> tuple:
    return (2, 4, 8, 16, 32, 64)


def default_t_grid(n_arms: int, t_max: int = 10 ** 7, points: int = 25) -> tuple:
    """Log-spaced horizons from ceil(K^2.4) to t_max."""
    t_min = math.ceil(n_arms ** 2.4)
    if t_min >= t_max:
        return (t_min,)
    ts = np.unique(
        np.round(np.exp(np.linspace(math.log(t_min), math.log(t_max), points)))
    ).astype(np.int64)
    return tuple(int(t) for t in ts if t >= t_min)


def lemma1_ratio(n_arms: int, horizon: int, m: int, rho: float = 0.5) -> float:
    """rho*m*ln2 / (ln(psi*T) - 2m*ln2) with psi = T/K^2."""
    psi = horizon / (n_arms * n_arms)
    denom = math.log(psi * horizon) - 2.0 * m * _LN2
    return rho * m * _LN2 / denom


def verify_lemma1(ks=None, t_max: int = 10 ** 7, t_points: int = 25) -> GridReport:
    """Check rho*m*ln2/(ln(psi T) - 2m ln2) <= 3/2 over the admissible grid.

    Admissible: T >= K^2.4, psi = T/K^2, rho = 1/2, 0 <= m <= log2(T/e)/2.
    Out-of-regime grid points are skipped and counted.
    """
    ks = ks or default_k_grid()
    points = skipped = 0
    violations = []
    worst = -math.inf
    worst_point = ()
    for k in ks:
        for t in default_t_grid(k, t_max, t_points):
            if t < k ** 2.4:
                skipped += 1
                continue
            m_cap = math.floor(0.5 * math.log2(t / math.e))
            for m in range(m_cap + 1):
                ratio = lemma1_ratio(k, t, m)
                points += 1
                margin = ratio - 1.5
                if margin > worst:
                    worst, worst_point = margin, (k, t, m)
                if ratio > 1.5:
                    violations.append((k, t, m, ratio))
    return GridReport("lemma1", points, skipped, tuple(violations), worst, worst_point)


def elimination_round(gap: float) -> int:
    """m_i = min{m : sqrt(4 * 2^-m) < gap/4}."""
    if not 0.0 < gap:
        raise ValueError("gap must be positive")
    m = 0
    while not math.sqrt(4.0 * 2.0 ** -m) < gap / 4.0:
        m += 1
    return m


def verify_lemma2(ks=None, t_max: int = 10 ** 7, t_points: int = 25,
                  deltas=None) -> GridReport:
    """Check the confidence radius at round m_i stays below gap/4.

    At m_i = min{m : sqrt(4 eps_m) < gap/4}, with z = n_{m_i} =
    ln(psi T eps^2)/(2 eps) (the un-ceiled quota from the analysis) and the
    estimated variance at its maximum 1, verifies

        sqrt(rho * 3 * ln(psi T eps) / (4 n_{m_i})) < gap / 4.

    Points whose m_i exceeds the round cap M are out of regime and skipped.
    """
    ks = ks or default_k_grid()
    deltas = deltas if deltas is not None else tuple(
        float(d) for d in np.geomspace(0.01, 1.0, 20)
    )
    rho = 0.5
    points = skipped = 0
    violations = []
    worst = -math.inf
    worst_point = ()
    for k in ks:
        for t in default_t_grid(k, t_max, t_points):
            if t < k ** 2.4:
                skipped += 1
                continue
            psi = t / (k * k)
            m_cap = math.floor(0.5 * math.log2(t / math.e))
            for gap in deltas:
                m_i = elimination_round(gap)
                if m_i > m_cap:
                    skipped += 1
                    continue
                eps = 2.0 ** -m_i
                quota = _clamped_log(psi * t * eps * eps) / (2.0 * eps)
                if quota <= 0.0:
                    skipped += 1
                    continue
                radius = math.sqrt(rho * 3.0 * _clamped_log(psi * t * eps) / (4.0 * quota))
                points += 1
                margin = radius - gap / 4.0
                if margin > worst:
                    worst, worst_point = margin, (k, t, gap)
                if not radius < gap / 4.0:
                    violations.append((k, t, gap, radius))
    return GridReport("lemma2", points, skipped, tuple(violations), worst, worst_point)


def verify_lemma6(c_pairs=None, sigmas=None) -> GridReport:
    """Check the coefficient inequality c1*(4s + 4) <= c2*s over a grid.

    This is the comparison the analysis reduces to once the shared positive
    factor ln(T*gap^2/K)/gap is cancelled (requires T*gap^2/K > 1).  With
    c2 = 20*c1 it holds with equality at s = 1/4 and fails for any s < 1/4;
    failures are reported as data, not raised.
    """
    c_pairs = c_pairs or ((1, 20), (1, 40), (2, 40), (3, 60))
    sigmas = sigmas if sigmas is not None else (0.0, 0.05, 0.1, 0.15, 0.2, 0.24, 0.25)
    points = 0
    violations = []
    worst = -math.inf
    worst_point = ()
    for c1, c2 in c_pairs:
        if not 20 * c1 <= c2:
            raise ValueError(f"pair ({c1}, {c2}) violates the premise 20*c1 <= c2")
        for s in sigmas:
            if not 0.0 <= s <= 0.25:
                raise ValueError("sigma^2 must lie in [0, 1/4] for bounded rewards")
            lhs = c1 * (4.0 * s + 4.0)
            rhs = c2 * s
            points += 1
            margin = lhs - rhs
            if margin > worst:
                worst, worst_point = margin, (c1, c2, s)
            if lhs > rhs:
                violations.append((c1, c2, s, lhs, rhs))
    return GridReport("lemma6", points, 0, tuple(violations), worst, worst_point)


# ---------------------------------------------------------------------------
# Concentration (Bernstein-style tail) Monte-Carlo check


@dataclass(frozen=True)
class TailReport:
    """Monte-Carlo tail frequency vs. the stated concentration bound."""

    side: str
    pulls: int
    radius: float
    bound: float
    samples: int
    frequency: float
    threshold: float  # bound + 3 binomial standard errors at the bound

    @property
    def ok(self) -> bool:
        return self.frequency <= self.threshold


def check_bernstein_tail(arm: ArmModel, pulls: int, epsilon_m: float, psi: float,
                         horizon: int, rho: float, samples: int, rng: RngStream,
                         side: str = "upper") -> TailReport:
    """Estimate P(mean_hat deviates from the mean by the analysis radius).

    The radius is c = sqrt(rho*(sigma^2 + sqrt(eps_m) + 2)*ln(psi*T*eps_m) /
    (4*z)); the stated bound on the one-sided deviation probability is
    2/(psi*T*eps_m)^(3*rho/2).  Passes when the empirical frequency does not
    exceed the bound by more than 3 binomial standard errors (computed at the
    bound).  Doubling z can only shrink the true probability, which gives a
    paired secondary check.
    """
    if arm.kind != BERNOULLI:
        raise ValueError("the tail check needs a bounded (Bernoulli) arm")
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    if pulls < 1 or samples < 1:
        raise ValueError("pulls and samples must be >= 1")
    log_term = _clamped_log(psi * horizon * epsilon_m)
    radius = math.sqrt(
        rho * (arm.variance + math.sqrt(epsilon_m) + 2.0) * log_term / (4.0 * pulls)
    )
    bound = 2.0 / (psi * horizon * epsilon_m) ** (1.5 * rho)
    draws = rng.uniforms(samples * pulls).reshape(samples, pulls)
    means = (draws < arm.mean).mean(axis=1)
    if side == "upper":
        frequency = float((means > arm.mean + radius).mean())
    else:
        frequency = float((means < arm.mean - radius).mean())
    threshold = bound + 3.0 * math.sqrt(bound * (1.0 - bound) / samples)
    return TailReport(side, pulls, radius, bound, samples, frequency, threshold)
