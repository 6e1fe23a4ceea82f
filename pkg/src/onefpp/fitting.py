"""Least-squares exponent fits and the Hill tail estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats


class FitModel(str, Enum):
    LOGLOG = "LogLog"
    LOGLOGLOG = "LogLogLog"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ScalingFit:
    model: FitModel
    slope: float
    intercept: float
    half_width: float
    r2: float
    n: int

    def as_dict(self) -> dict:
        return {
            "model": str(self.model),
            "slope": self.slope,
            "intercept": self.intercept,
            "half_width": self.half_width,
            "r2": self.r2,
            "n": self.n,
        }


def _abscissa(x: np.ndarray, model: FitModel) -> np.ndarray:
    if model == FitModel.LOGLOG:
        return np.log(x)
    lx = np.log(x)
    if np.any(lx <= 0):
        raise ValueError("LogLogLog needs abscissae above 1")
    return np.log(lx)


def estimate_exponent(xs, ys, model: FitModel | str = FitModel.LOGLOG, level: float = 0.95) -> ScalingFit:
    """OLS of log y on log x (LogLog) or on log log x (LogLogLog).

    The half-width is the two-sided t interval for the slope at the given level.
    """
    model = FitModel(model)
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 samples")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples must be positive and finite")
    X = _abscissa(x, model)
    Y = np.log(y)
    xc = X - X.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-300 * max(1.0, float(X @ X)):
        raise ValueError("abscissae are degenerate (all equal)")
    slope = float(xc @ (Y - Y.mean())) / sxx
    intercept = float(Y.mean() - slope * X.mean())
    resid = Y - (intercept + slope * X)
    sse = float(resid @ resid)
    yc = Y - Y.mean()
    syy = float(yc @ yc)
    r2 = 1.0 - sse / syy if syy > 0 else 1.0
    n = x.size
    se = math.sqrt(sse / (n - 2) / sxx)
    t = float(stats.t.ppf(0.5 + level / 2, n - 2))
    return ScalingFit(model, slope, intercept, t * se, r2, n)


def hill_estimator(values, k: int) -> float:
    """Hill estimate of the tail index from the k largest values: 1 / mean log(X_(i) / X_(k+1))."""
    v = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    if not (1 <= k < v.size):
        raise ValueError("k must lie in [1, n)")
    if v[k] <= 0:
        raise ValueError("the (k+1)-th largest value must be positive")
    logs = np.log(v[:k] / v[k])
    m = float(logs.mean())
    return math.inf if m == 0 else 1.0 / m


def hill_k(n: int) -> int:
    """Default number of order statistics: the integer part of sqrt(n)."""
    return max(1, int(math.isqrt(n)))
