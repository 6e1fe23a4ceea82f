"""Flat key=value experiment configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

from .distributions import LDistribution
from .geometry import Domain
from .params import ModelParams, validate_params


class ConfigError(ValueError):
    pass


class ExperimentKind(str, Enum):
    DISTANCE_SCALING = "distance_scaling"
    MU_SWEEP = "mu_sweep"
    CENSUS = "census"
    BLOCK_SCAN = "blocks"
    PERC_CHECK = "perc"
    BALL_GROWTH = "ball_growth"

    def __str__(self) -> str:
        return self.value


class PairRule(str, Enum):
    ROOT_TO_SHELL = "root_to_shell"
    UNIFORM_PAIRS_IN_GIANT = "uniform_pairs_in_giant"

    def __str__(self) -> str:
        return self.value


# keys that a manifest adds on top of a config
MANIFEST_KEYS = ("seed", "version", "started_at", "command")


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(_float(t) for t in text.split(","))


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(t) for t in text.split(","))


def _float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinite", "infinity"):
        return math.inf
    return float(t)


def _opt_float(text: str):
    t = text.strip().lower()
    return None if t in ("", "none") else _float(t)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {text}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind = ExperimentKind.DISTANCE_SCALING
    # model
    d: int = 2
    tau: float = 2.5
    alpha: float = 3.5
    mu: float = 0.8
    beta: float = 1.0
    c_lower: float = 1.0
    c_upper: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    t0: float = 1.0
    c_prime: float | None = None
    l_kind: str = "power"
    l_value: float = 1.0
    # domain and generation
    domain_kind: str = "lattice"
    half_side: float = 100.0
    mode: str = "cell"
    seeds: tuple[int, ...] = (0,)
    # distance experiments
    pair_rule: PairRule = PairRule.ROOT_TO_SHELL
    radii: tuple[float, ...] = (8.0, 16.0, 32.0, 64.0)
    targets_per_radius: int = 4
    pair_count: int = 200
    mu_list: tuple[float, ...] = ()
    fit_model: str = "LogLog"
    # ball growth
    ball_radii: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0)
    # census
    census_A: float = 200.0
    census_N: tuple[float, ...] = (10.0, 20.0, 40.0)
    census_a: float = 0.3
    census_samples: int = 400_000
    epsilon: float = 0.1
    # blocks
    block_base: float = 8.0
    block_gamma: int = 4
    block_top_level: int = 3
    block_eta: float = 0.5
    block_u: float = 1e-4
    block_verify: bool = True
    # percolation
    perc_d: int = 2
    perc_side: int = 64
    perc_p: float = 0.99
    perc_r: float = 16.0
    perc_rho: float = 4.0
    perc_pairs: int = 100
    perc_kappa: float = 1.5
    perc_zeta: float = 0.5
    gm_M: tuple[float, ...] = ()
    gm_D: int = 2

    def model_params(self) -> ModelParams:
        return ModelParams(d=self.d, tau=self.tau, alpha=self.alpha, mu=self.mu, beta=self.beta,
                           c_lower=self.c_lower, c_upper=self.c_upper, c1=self.c1, c2=self.c2,
                           t0=self.t0, c_prime=self.c_prime)

    def l_spec(self) -> LDistribution:
        if self.l_kind == "constant":
            return LDistribution.constant(self.l_value)
        if self.l_kind == "power":
            if math.isinf(self.beta):
                return LDistribution.constant(1.0)
            return LDistribution.power(self.beta)
        raise ConfigError(f"unknown l_kind {self.l_kind}")

    def domain(self) -> Domain:
        return Domain(self.d, self.domain_kind, self.half_side)

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return replace(self, seeds=tuple(int(s) for s in seeds))

    def to_text(self) -> str:
        """Canonical key=value text, one key per line in field order."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name}={_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def _format(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


_PARSERS = {
    "experiment": ExperimentKind,
    "pair_rule": PairRule,
    "d": int, "perc_d": int, "perc_side": int, "perc_pairs": int, "targets_per_radius": int,
    "pair_count": int, "census_samples": int, "block_gamma": int, "block_top_level": int, "gm_D": int,
    "seeds": _ints,
    "radii": _floats, "mu_list": _floats, "ball_radii": _floats, "census_N": _floats, "gm_M": _floats,
    "c_prime": _opt_float,
    "block_verify": _bool,
    "l_kind": str, "domain_kind": str, "mode": str, "fit_model": str,
}


def parse_config(text: str) -> tuple[ExperimentConfig, dict]:
    """Parse key=value lines; returns the config and any manifest metadata.

    Blank lines and lines starting with '#' are skipped. Unknown keys are rejected.
    A manifest's `seed` key overrides `seeds`.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    meta: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, _, val = line.partition("=")
        key = key.strip()
        if key in MANIFEST_KEYS:
            meta[key] = val.strip()
            continue
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        conv = _PARSERS.get(key, _float)
        try:
            values[key] = conv(val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from None
    if "seed" in meta:
        values["seeds"] = _ints(meta["seed"])
    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg, meta


def load_config(path) -> tuple[ExperimentConfig, dict]:
    with open(path) as fh:
        return parse_config(fh.read())


def validate_config(cfg: ExperimentConfig) -> None:
    problems = []
    if len(set(cfg.seeds)) != len(cfg.seeds):
        problems.append("seeds must be distinct")
    if any(s < 0 for s in cfg.seeds):
        problems.append("seeds must be non-negative")
    if not cfg.seeds:
        problems.append("at least one seed is needed")
    for name in ("radii", "ball_radii", "census_N", "gm_M"):
        vals = getattr(cfg, name)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            problems.append(f"{name} must be strictly increasing")
        if any(v <= 0 for v in vals):
            problems.append(f"{name} must be positive")
    if list(cfg.mu_list) != sorted(cfg.mu_list):
        problems.append("mu_list must be sorted")
    if cfg.domain_kind not in ("lattice", "continuum"):
        problems.append("domain_kind must be lattice or continuum")
    if cfg.mode not in ("cell", "naive"):
        problems.append("mode must be cell or naive")
    if cfg.fit_model not in ("LogLog", "LogLogLog"):
        problems.append("fit_model must be LogLog or LogLogLog")
    if cfg.l_kind not in ("power", "constant"):
        problems.append("l_kind must be power or constant")
    if cfg.targets_per_radius < 1 or cfg.pair_count < 1:
        problems.append("pair counts must be positive")
    if not (0 <= cfg.perc_p <= 1):
        problems.append("perc_p must lie in [0, 1]")
    if problems:
        raise ConfigError("; ".join(problems))
    validate_params(cfg.model_params())
