"""Model parameters, validation, phase thresholds and the growth exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

INFINITE = math.inf

DEFAULT_BOUNDARY_RTOL = 1e-9


class Phase(str, Enum):
    EXPLOSIVE = "Explosive"
    POLYLOGARITHMIC = "Polylogarithmic"
    STRICT_POLYNOMIAL = "StrictPolynomial"
    LINEAR = "Linear"
    NON_SCALE_FREE_LINEAR = "NonScaleFreeLinear"
    BOUNDARY = "Boundary"
    UNCLASSIFIED = "Unclassified"

    def __str__(self) -> str:
        return self.value


class ParameterError(ValueError):
    """Raised when a parameter set violates one or more constraints.

    ``problems`` holds one message per violated constraint.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ModelParams:
    d: int
    tau: float
    alpha: float
    mu: float
    beta: float
    c_lower: float = 1.0
    c_upper: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    t0: float = 1.0
    c_prime: float | None = None

    def with_mu(self, mu: float) -> "ModelParams":
        return replace(self, mu=mu)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def alpha_infinite(self) -> bool:
        return math.isinf(self.alpha)

    @property
    def beta_infinite(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True)
class PhaseReport:
    mu_log: float
    mu_pol: float
    mu_pol_alpha: float
    eta_0: float
    explosion_threshold: float
    phase: Phase


def _bad_number(x) -> bool:
    return x is None or isinstance(x, bool) or not isinstance(x, (int, float)) or math.isnan(x)


def validate_params(par: ModelParams) -> None:
    """Raise ParameterError listing every violated constraint."""
    problems = []
    if isinstance(par.d, bool) or not isinstance(par.d, int) or par.d < 1:
        problems.append("d must be a positive integer")
    for name in ("tau", "alpha", "mu", "beta", "c_lower", "c_upper", "c1", "c2", "t0"):
        if _bad_number(getattr(par, name)):
            problems.append(f"{name} must be a real number")
    if problems:
        raise ParameterError(problems)

    if not (par.tau > 2) or math.isinf(par.tau):
        problems.append("tau must exceed 2 and be finite")
    if not (par.alpha > 1):
        problems.append("alpha must exceed 1 (or be INFINITE)")
    if not (par.mu >= 0) or math.isinf(par.mu):
        problems.append("mu must be a finite real >= 0")
    if not (par.beta > 0):
        problems.append("beta must be positive (or INFINITE)")
    if not (0 < par.c_lower < INFINITE):
        problems.append("c_lower must be positive and finite")
    if not (0 < par.c_upper < INFINITE):
        problems.append("c_upper must be positive and finite")
    if par.c_lower > par.c_upper:
        problems.append("c_lower must not exceed c_upper")
    if not (0 < par.c1 < INFINITE) or not (0 < par.c2 < INFINITE):
        problems.append("c1 and c2 must be positive and finite")
    if par.c1 > par.c2:
        problems.append("c1 must not exceed c2")
    if not (0 < par.t0 <= 1):
        problems.append("t0 must lie in (0, 1]")
    if par.alpha_infinite:
        if par.c_prime is None or _bad_number(par.c_prime):
            problems.append("c_prime must be set when alpha is INFINITE")
        elif not (0 < par.c_prime <= 1):
            problems.append("c_prime must lie in (0, 1]")
    if problems:
        raise ParameterError(problems)


def _close(a: float, b: float, rtol: float) -> bool:
    if math.isnan(a) or math.isnan(b) or math.isinf(b):
        return False
    return abs(a - b) <= rtol * max(abs(a), abs(b)) or abs(a - b) <= 1e-15


def mu_pol_alpha_value(d: int, tau: float, alpha: float) -> float:
    """(alpha - (tau-1)) / (d (alpha-2)); 1/d for alpha = INFINITE; NaN for alpha <= 2."""
    if math.isinf(alpha):
        return 1.0 / d
    if alpha <= 2:
        return math.nan
    return (alpha - (tau - 1.0)) / (d * (alpha - 2.0))


def compute_thresholds(par: ModelParams, rtol: float = DEFAULT_BOUNDARY_RTOL) -> PhaseReport:
    validate_params(par)
    d, tau, alpha, beta, mu = par.d, par.tau, par.alpha, par.beta, par.mu

    if tau < 3 or _close(tau, 3.0, rtol):
        mu_log = 0.0 if math.isinf(beta) else (3.0 - tau) / beta
        mu_pa = mu_pol_alpha_value(d, tau, alpha)
        mu_pol = max(mu_log + 1.0 / d, mu_pa) if not math.isnan(mu_pa) else math.nan
        if math.isnan(mu_pol):
            # alpha <= 2: growth is at most polylogarithmic, no polynomial exponent
            eta = 0.0
        elif mu > mu_pol:
            eta = 1.0
        elif mu <= mu_log:
            eta = 0.0
        else:
            eta = min(d * (mu - mu_log), mu / mu_pa)
    else:
        # beyond tau = 3 the weights have finite variance and both thresholds vanish
        mu_log = 0.0
        mu_pol = 0.0
        mu_pa = mu_pol_alpha_value(d, tau, alpha)
        eta = 1.0

    if tau >= 3 or _close(tau, 3.0, rtol):
        expl = math.nan
    elif math.isinf(beta):
        expl = 0.0
    else:
        expl = (3.0 - tau) / (2.0 * beta)

    report = PhaseReport(mu_log, mu_pol, mu_pa, eta, expl, Phase.UNCLASSIFIED)
    return replace(report, phase=_classify(par, report, rtol))


def _classify(par: ModelParams, rep: PhaseReport, rtol: float) -> Phase:
    tau, alpha, mu = par.tau, par.alpha, par.mu
    if _close(tau, 3.0, rtol) or (not math.isinf(alpha) and _close(alpha, 2.0, rtol)):
        return Phase.UNCLASSIFIED
    if tau > 3:
        return Phase.NON_SCALE_FREE_LINEAR if alpha > 2 else Phase.UNCLASSIFIED

    expl = rep.explosion_threshold
    thresholds = [expl]
    if alpha > 2:
        thresholds += [rep.mu_log, rep.mu_pol]
    if any(_close(mu, t, rtol) for t in thresholds):
        return Phase.BOUNDARY
    if mu < expl:
        return Phase.EXPLOSIVE
    if alpha < 2:
        return Phase.POLYLOGARITHMIC
    if mu < rep.mu_log:
        return Phase.POLYLOGARITHMIC
    if mu < rep.mu_pol:
        return Phase.STRICT_POLYNOMIAL
    return Phase.LINEAR


def classify_phase(par: ModelParams, rtol: float = DEFAULT_BOUNDARY_RTOL) -> Phase:
    return compute_thresholds(par, rtol).phase
