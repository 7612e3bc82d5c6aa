"""Experiment configuration: INI files and compiled-in presets.

Config format (flat sections; unknown keys are errors)::

    [experiment]
    name = my-experiment
    horizon = 60000
    runs = 100
    master_seed = 123456789     ; optional
    env_seed = 987654321        ; optional, random-variance presets only
    checkpoints = 200           ; optional

    [environment]
    preset = expt1              ; either this ...
    kind = bernoulli            ; ... or kind/means(/variances)
    means = 0.07*19, 0.1        ; "value*count" repeats the value
    variances = 0.01*66, 0.25*34   ; gaussian only

    [policy.eucbv]              ; one section per policy, in run order
    rho = 0.5

Presets expt1..expt4 reproduce the four benchmark testbeds; expt3/expt4 draw
their randomized per-arm variances once from env_seed and freeze them for
all replications.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .env import BERNOULLI, GAUSSIAN, make_environment
from .policies import POLICY_IDS, validate_params
from .rng import DOMAIN_ENV_GEN, RngStream, derive_key
from .simulator import DEFAULT_CHECKPOINTS

DEFAULT_MASTER_SEED = 123456789
DEFAULT_ENV_SEED = 987654321

PRESET_NAMES = ("expt1", "expt2", "expt3", "expt4")


class ConfigError(Exception):
    """Base for configuration problems."""


class ConfigParseError(ConfigError):
    """The config file could not be read or parsed."""


class ConfigValidationError(ConfigError):
    """The config parsed but a field is invalid."""


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully validated experiment description."""

    name: str
    arms: tuple                    # (kind, mean, variance) triples
    horizon: int
    runs: int
    master_seed: int
    env_seed: int
    policies: tuple                # (policy_id, params dict) pairs
    checkpoints: int = DEFAULT_CHECKPOINTS

    def environment(self):
        return make_environment(self.arms)


def _group(kind: str, means, variances=None) -> list:
    if variances is None:
        return [(kind, m, None) for m in means]
    return [(kind, m, v) for m, v in zip(means, variances)]


def _env_uniforms(env_seed: int, n: int, lo: float, hi: float) -> list:
    """n frozen Uniform[lo, hi) draws for randomized testbed variances."""
    rng = RngStream(derive_key(env_seed, 0, DOMAIN_ENV_GEN))
    return [lo + (hi - lo) * u for u in rng.uniforms(n).tolist()]


def preset_spec(name: str, *, runs: int | None = None, horizon: int | None = None,
                master_seed: int | None = None, env_seed: int | None = None,
                checkpoints: int | None = None) -> ExperimentSpec:
    """Build one of the compiled-in presets, with optional overrides."""
    if name not in PRESET_NAMES:
        raise ConfigValidationError(
            f"unknown preset {name!r} (known: {', '.join(PRESET_NAMES)})"
        )
    master_seed = DEFAULT_MASTER_SEED if master_seed is None else master_seed
    env_seed = DEFAULT_ENV_SEED if env_seed is None else env_seed
    checkpoints = DEFAULT_CHECKPOINTS if checkpoints is None else checkpoints

    if name == "expt1":
        arms = _group(BERNOULLI, [0.07] * 19 + [0.1])
        t = 60000
        roster = (
            ("eucbv", {}),
            ("ucb1", {}),
            ("ucbv", {}),
            ("moss", {}),
            ("ocucb", {}),
            ("klucb-plus", {}),
            ("ts-beta", {}),
            ("dmed", {}),
        )
    elif name == "expt2":
        means = [0.07] * 66 + [0.01] * 33 + [0.09]
        variances = [0.01] * 66 + [0.25] * 33 + [0.25]
        arms = _group(GAUSSIAN, means, variances)
        t = 300000
        roster = (
            ("eucbv", {}),
            ("ucb1", {}),
            ("ucbv", {}),
            ("moss", {}),
            ("ocucb", {}),
            ("ucb-improved", {}),
            ("ts-gauss", {}),
            ("bayes-ucb", {"prior": "gauss"}),
            ("median-elim", {"epsilon": 0.1, "delta": 0.1}),
        )
    elif name == "expt3":
        means = [0.045] * 10 + [0.04] * 89 + [0.05]
        variances = [0.01] * 10 + _env_uniforms(env_seed, 89, 0.2, 0.24) + [0.25]
        arms = _group(GAUSSIAN, means, variances)
        t = 400000
        roster = (
            ("eucbv", {}),
            ("ucbv", {}),
            ("moss", {}),
            ("ocucb", {}),
            ("ts-gauss", {}),
            ("bayes-ucb", {"prior": "gauss"}),
        )
    else:  # expt4
        draws = _env_uniforms(env_seed, 99, 0.0, 1.0)
        variances = (
            [0.05 * u for u in draws[:49]]
            + [0.19 + 0.05 * u for u in draws[49:]]
            + [0.25]
        )
        arms = _group(GAUSSIAN, [0.09] * 99 + [0.1], variances)
        t = 400000
        roster = (
            ("eucbv", {}),
            ("ucbv", {}),
            ("moss", {}),
            ("ocucb", {}),
            ("ts-gauss", {}),
            ("bayes-ucb", {"prior": "gauss"}),
        )

    spec = ExperimentSpec(
        name=name,
        arms=tuple(arms),
        horizon=t if horizon is None else horizon,
        runs=100 if runs is None else runs,
        master_seed=master_seed,
        env_seed=env_seed,
        policies=roster,
        checkpoints=checkpoints,
    )
    _validate_spec(spec)
    return spec


def _validate_spec(spec: ExperimentSpec) -> None:
    if spec.runs < 1:
        raise ConfigValidationError(f"runs must be >= 1, got {spec.runs}")
    if spec.horizon < len(spec.arms):
        raise ConfigValidationError(
            f"horizon {spec.horizon} smaller than the number of arms {len(spec.arms)}"
        )
    if spec.checkpoints < 1:
        raise ConfigValidationError("checkpoints must be >= 1")
    if not spec.policies:
        raise ConfigValidationError("at least one [policy.<id>] section is required")
    for pid, params in spec.policies:
        if pid not in POLICY_IDS:
            raise ConfigValidationError(
                f"unknown policy id {pid!r} (known: {', '.join(POLICY_IDS)})"
            )
        try:
            validate_params(pid, params)
        except ValueError as exc:
            raise ConfigValidationError(str(exc)) from exc
    try:
        make_environment(spec.arms)
    except ValueError as exc:
        raise ConfigValidationError(str(exc)) from exc


_EXPERIMENT_KEYS = {"name", "horizon", "runs", "master_seed", "env_seed", "checkpoints"}
_ENVIRONMENT_KEYS = {"preset", "kind", "means", "variances"}


def _parse_value_list(text: str, what: str) -> list:
    """Parse "v1*n1, v2, v3*n3" into an expanded float list."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "*" in token:
            value_s, _, count_s = token.partition("*")
            try:
                value, count = float(value_s), int(count_s)
            except ValueError as exc:
                raise ConfigValidationError(f"bad {what} entry {token!r}") from exc
            if count < 1:
                raise ConfigValidationError(f"bad {what} repeat count in {token!r}")
            out.extend([value] * count)
        else:
            try:
                out.append(float(token))
            except ValueError as exc:
                raise ConfigValidationError(f"bad {what} entry {token!r}") from exc
    if not out:
        raise ConfigValidationError(f"{what} list is empty")
    return out


def _get_int(section, key: str, default=None):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigValidationError(f"[{section.name}] {key} must be an integer, got {raw!r}") from exc


def load_config(path: str) -> ExperimentSpec:
    """Parse and validate an experiment config file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigParseError(f"cannot parse config {path}: {exc}") from exc

    sections = set(parser.sections())
    policy_sections = [s for s in sections if s.startswith("policy.")]
    known = {"experiment", "environment"} | set(policy_sections)
    unknown = sections - known
    if unknown:
        raise ConfigValidationError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    if "experiment" not in sections:
        raise ConfigValidationError("missing [experiment] section")

    exp = parser["experiment"]
    bad = set(exp) - _EXPERIMENT_KEYS
    if bad:
        raise ConfigValidationError(f"unknown [experiment] key(s): {', '.join(sorted(bad))}")

    env_section = parser["environment"] if "environment" in sections else {}
    if "environment" in sections:
        bad = set(env_section) - _ENVIRONMENT_KEYS
        if bad:
            raise ConfigValidationError(f"unknown [environment] key(s): {', '.join(sorted(bad))}")

    policies = []
    for sec_name in parser.sections():
        if not sec_name.startswith("policy."):
            continue
        pid = sec_name[len("policy."):]
        params = dict(parser[sec_name])
        policies.append((pid, params))

    preset = env_section.get("preset") if env_section else None
    if preset is not None:
        base = preset_spec(
            preset,
            runs=_get_int(exp, "runs"),
            horizon=_get_int(exp, "horizon"),
            master_seed=_get_int(exp, "master_seed"),
            env_seed=_get_int(exp, "env_seed"),
            checkpoints=_get_int(exp, "checkpoints"),
        )
        extra = set(env_section) - {"preset"}
        if extra:
            raise ConfigValidationError(
                f"[environment] preset excludes other keys: {', '.join(sorted(extra))}"
            )
        spec = ExperimentSpec(
            name=exp.get("name", base.name),
            arms=base.arms,
            horizon=base.horizon,
            runs=base.runs,
            master_seed=base.master_seed,
            env_seed=base.env_seed,
            policies=tuple((p, dict(prm)) for p, prm in (policies or base.policies)),
            checkpoints=base.checkpoints,
        )
        _validate_spec(spec)
        return spec

    if "environment" not in sections:
        raise ConfigValidationError("missing [environment] section (or a preset)")
    kind = env_section.get("kind")
    if kind not in (BERNOULLI, GAUSSIAN):
        raise ConfigValidationError(
            f"[environment] kind must be '{BERNOULLI}' or '{GAUSSIAN}', got {kind!r}"
        )
    means = _parse_value_list(env_section.get("means", ""), "means")
    if kind == GAUSSIAN:
        if "variances" not in env_section:
            raise ConfigValidationError("[environment] gaussian arms need variances")
        variances = _parse_value_list(env_section["variances"], "variances")
        if len(variances) != len(means):
            raise ConfigValidationError(
                f"means ({len(means)}) and variances ({len(variances)}) differ in length"
            )
        arms = tuple(_group(GAUSSIAN, means, variances))
    else:
        if "variances" in env_section:
            raise ConfigValidationError("[environment] bernoulli arms derive their variances")
        arms = tuple(_group(BERNOULLI, means))

    horizon = _get_int(exp, "horizon")
    runs = _get_int(exp, "runs")
    if horizon is None or runs is None:
        raise ConfigValidationError("[experiment] horizon and runs are required")
    spec = ExperimentSpec(
        name=exp.get("name", "experiment"),
        arms=arms,
        horizon=horizon,
        runs=runs,
        master_seed=_get_int(exp, "master_seed", DEFAULT_MASTER_SEED),
        env_seed=_get_int(exp, "env_seed", DEFAULT_ENV_SEED),
        policies=tuple(policies),
        checkpoints=_get_int(exp, "checkpoints", DEFAULT_CHECKPOINTS),
    )
    _validate_spec(spec)
    return spec
