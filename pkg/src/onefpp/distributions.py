"""Vertex weight and edge-factor (L) distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


def sample_weight(tau: float, u):
    """Pareto inverse CDF: P(W > w) = w^-(tau-1) for w >= 1."""
    if not tau > 2:
        raise ValueError("tau must exceed 2")
    u = np.asarray(u, dtype=np.float64)
    w = (1.0 - u) ** (-1.0 / (tau - 1.0))
    return float(w) if w.ndim == 0 else w


class LKind(str, Enum):
    POWER = "power"
    CONSTANT = "constant"
    TABLE = "table"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LDistribution:
    """Distribution of the iid edge factor L.

    power:    F(t) = min(1, (t/cap)^beta)
    constant: L = value
    table:    piecewise-linear CDF through the (t, F) points of ``table``
    """

    kind: LKind = LKind.POWER
    beta: float = 1.0
    cap: float = 1.0
    value: float = 1.0
    table: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", LKind(self.kind))
        if self.kind == LKind.POWER:
            if not (self.beta > 0) or math.isinf(self.beta):
                raise ValueError("power L needs a finite beta > 0")
            if not (self.cap > 0):
                raise ValueError("power L needs cap > 0")
        elif self.kind == LKind.CONSTANT:
            if not (self.value > 0):
                raise ValueError("constant L needs a positive value")
        else:
            t = np.array([p[0] for p in self.table], dtype=float)
            f = np.array([p[1] for p in self.table], dtype=float)
            if len(t) < 2:
                raise ValueError("table CDF needs at least two points")
            if np.any(np.diff(t) <= 0) or np.any(np.diff(f) < 0):
                raise ValueError("table CDF must be monotone")
            if f[0] != 0.0 or f[-1] != 1.0 or t[0] < 0:
                raise ValueError("table CDF must run from F=0 to F=1 on t >= 0")

    @classmethod
    def power(cls, beta: float, cap: float = 1.0) -> "LDistribution":
        return cls(LKind.POWER, beta=beta, cap=cap)

    @classmethod
    def constant(cls, value: float = 1.0) -> "LDistribution":
        return cls(LKind.CONSTANT, value=value)

    @classmethod
    def from_table(cls, points) -> "LDistribution":
        return cls(LKind.TABLE, table=tuple((float(a), float(b)) for a, b in points))

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == LKind.POWER:
            out = np.minimum(1.0, np.maximum(t, 0.0) / self.cap) ** self.beta
        elif self.kind == LKind.CONSTANT:
            out = (t >= self.value).astype(np.float64)
        else:
            tt, ff = zip(*self.table)
            out = np.interp(t, tt, ff, left=0.0, right=1.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, u):
        """Inverse-CDF sample from uniforms u in [0, 1)."""
        u = np.asarray(u, dtype=np.float64)
        if self.kind == LKind.POWER:
            out = self.cap * u ** (1.0 / self.beta)
        elif self.kind == LKind.CONSTANT:
            out = np.full(u.shape, self.value)
        else:
            tt, ff = zip(*self.table)
            out = np.interp(u, ff, tt)
        return float(out) if out.ndim == 0 else out

    @property
    def has_polynomial_mass_at_zero(self) -> bool:
        if self.kind == LKind.CONSTANT:
            return False
        if self.kind == LKind.TABLE:
            return self.table[0][0] == 0.0 and self.table[1][1] > 0.0
        return True

    def assumption_constants(self) -> tuple[float, float, float]:
        """(c1, c2, t0) with c1 t^beta <= F(t) <= c2 t^beta on [0, t0] for the power kind."""
        if self.kind != LKind.POWER:
            raise ValueError("only the power kind has closed-form constants")
        c = self.cap ** (-self.beta)
        return c, c, min(1.0, self.cap)


def sample_L(spec: LDistribution, u):
    return spec.sample(u)


def check_compatible(par, spec: LDistribution) -> None:
    """beta = INFINITE needs an L without polynomial mass at 0; finite beta must match."""
    from .params import ParameterError

    if math.isinf(par.beta):
        if spec.has_polynomial_mass_at_zero:
            raise ParameterError(["beta = INFINITE needs an L distribution without mass near 0 (e.g. constant)"])
    elif spec.kind == LKind.POWER and not math.isclose(spec.beta, par.beta, rel_tol=1e-12):
        raise ParameterError([f"L exponent {spec.beta} does not match beta = {par.beta}"])
