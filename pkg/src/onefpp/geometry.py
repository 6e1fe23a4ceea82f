"""Boxes, lattices, Poisson sampling, boxing schemes and block hierarchies."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class DomainKind(str, Enum):
    CONTINUUM = "continuum"
    LATTICE = "lattice"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Domain:
    """The box [-half_side, half_side]^d, either continuum or its integer points."""

    d: int
    kind: DomainKind
    half_side: float
    torus_wrap: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if not (self.half_side > 0) or math.isinf(self.half_side):
            raise ValueError("half_side must be positive and finite")
        object.__setattr__(self, "kind", DomainKind(self.kind))

    @property
    def volume(self) -> float:
        return (2.0 * self.half_side) ** self.d

    @property
    def side(self) -> float:
        return 2.0 * self.half_side

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all(np.abs(pts) <= self.half_side, axis=1)


def sample_ppp(domain: Domain, intensity: float, seed: int) -> np.ndarray:
    """Poisson point process on the box, returned as an (n, d) array."""
    if domain.kind != DomainKind.CONTINUUM:
        raise ValueError("sample_ppp needs a continuum domain")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    rng = np.random.default_rng(seed)
    n = rng.poisson(intensity * domain.volume) if intensity > 0 else 0
    h = domain.half_side
    return rng.uniform(-h, h, size=(n, domain.d))


def lattice_points(domain: Domain) -> np.ndarray:
    """Integer points of the box in lexicographic order (last coordinate fastest)."""
    if domain.kind != DomainKind.LATTICE:
        raise ValueError("lattice_points needs a lattice domain")
    m = int(math.floor(domain.half_side + 1e-12))
    axis = np.arange(-m, m + 1, dtype=np.float64)
    grids = np.meshgrid(*([axis] * domain.d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def lattice_index(domain: Domain, point) -> int:
    """Position of an integer point in the lattice_points order."""
    m = int(math.floor(domain.half_side + 1e-12))
    n = 2 * m + 1
    idx = 0
    for c in point:
        ci = int(round(c))
        if ci != c or abs(ci) > m:
            raise ValueError(f"{tuple(point)} is not a lattice point of the domain")
        idx = idx * n + (ci + m)
    return idx


@dataclass(frozen=True)
class BoxingScheme:
    """Partition of R^d into half-open boxes S_z = R z + offset + [0, R)^d.

    The offset lies in (-R, 0]^d per coordinate so that R z is always in S_z.
    """

    R: float
    origin_offset: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (self.R > 0):
            raise ValueError("R must be positive")
        if self.origin_offset is not None:
            for o in self.origin_offset:
                if not (-self.R < o <= 0):
                    raise ValueError("origin_offset coordinates must lie in (-R, 0]")

    def _offset(self, d: int) -> np.ndarray:
        if self.origin_offset is None:
            return np.zeros(d)
        if len(self.origin_offset) != d:
            raise ValueError("origin_offset has wrong dimension")
        return np.asarray(self.origin_offset, dtype=np.float64)

    def box_of(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        off = self._offset(pts.shape[1])
        z = np.floor((pts - off) / self.R).astype(np.int64)
        # the division can round across a box edge; settle against the bounds box_bounds reports
        z -= (self.R * z + off > pts).astype(np.int64)
        z += (self.R * (z + 1) + off <= pts).astype(np.int64)
        return z[0] if single else z

    def box_bounds(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=np.float64)
        lo = self.R * z + self._offset(z.shape[-1])
        return lo, lo + self.R


def box_of(point, scheme: BoxingScheme) -> tuple[int, ...]:
    return tuple(int(c) for c in scheme.box_of(point))


class Schedule(str, Enum):
    FACTORIAL = "factorial"
    GEOMETRIC = "geometric"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlockGeometry:
    """Side lengths A_k = A1 (k!)^2 (factorial) or A1 gamma^k (geometric), levels k >= k0."""

    A1: float
    schedule: Schedule = Schedule.GEOMETRIC
    gamma: int = 4
    k0: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if not (self.A1 > 0):
            raise ValueError("A1 must be positive")
        if self.schedule == Schedule.GEOMETRIC and (int(self.gamma) != self.gamma or self.gamma < 2):
            raise ValueError("gamma must be an integer >= 2")
        if self.k0 is not None and self.k0 < 1 and self.schedule == Schedule.FACTORIAL:
            raise ValueError("factorial schedule needs k0 >= 1")

    def base_level(self, d: int) -> int:
        if self.k0 is not None:
            return self.k0
        return 16 * 30**d if self.schedule == Schedule.FACTORIAL else 0

    def log_side(self, k: int) -> float:
        if self.schedule == Schedule.FACTORIAL:
            return math.log(self.A1) + 2.0 * math.lgamma(k + 1)
        return math.log(self.A1) + k * math.log(self.gamma)

    def side(self, k: int) -> float:
        if self.schedule == Schedule.FACTORIAL:
            if k > 170:
                return math.exp(self.log_side(k)) if self.log_side(k) < 709 else math.inf
            return self.A1 * float(math.factorial(k)) ** 2
        return self.A1 * float(self.gamma) ** k

    def ratio(self, k: int) -> int:
        """A_k / A_{k-1}."""
        return k * k if self.schedule == Schedule.FACTORIAL else int(self.gamma)

    def child_count(self, k: int, d: int) -> int:
        return self.ratio(k) ** d


@dataclass(frozen=True)
class Block:
    level: int
    lower: tuple[float, ...]
    side: float

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(c + self.side for c in self.lower)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo = np.asarray(self.lower)
        return np.all((pts >= lo) & (pts < lo + self.side), axis=1)

    def translate(self, shift) -> "Block":
        return Block(self.level, tuple(c + s for c, s in zip(self.lower, shift)), self.side)


def children(block: Block, geom: BlockGeometry) -> list[Block]:
    """Natural partition of a k-block into (A_k/A_{k-1})^d blocks of level k-1."""
    k = block.level
    r = geom.ratio(k)
    s = block.side / r
    out = []
    for idx in itertools.product(range(r), repeat=len(block.lower)):
        out.append(Block(k - 1, tuple(c + i * s for c, i in zip(block.lower, idx)), s))
    return out


def block_of(point, geom: BlockGeometry, k: int, j=None) -> tuple[tuple[int, ...], Block, list[Block]]:
    """The level-k block of the centred tiling shifted by j A_{k-1}/2 containing the point.

    Returns (block index, block, children).
    """
    point = np.asarray(point, dtype=np.float64)
    d = point.shape[0]
    k0 = geom.base_level(d)
    if k < k0:
        raise ValueError(f"level {k} is below the base level {k0}")
    if j is None:
        j = (0,) * d
    a = geom.side(k)
    shift = np.asarray(j, dtype=np.float64) * (geom.side(k - 1) / 2.0)
    origin = -a / 2.0 + shift
    idx = np.floor((point - origin) / a).astype(np.int64)
    lower = origin + idx * a
    blk = Block(k, tuple(float(c) for c in lower), a)
    kids = children(blk, geom) if k > k0 else []
    return tuple(int(i) for i in idx), blk, kids


def point_segment_distance(p: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Euclidean distance of each row of p to the segment [u, v]."""
    p = np.atleast_2d(np.asarray(p, dtype=np.float64))
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    seg = v - u
    ll = float(seg @ seg)
    if ll == 0.0:
        return np.sqrt(((p - u) ** 2).sum(axis=1))
    t = np.clip(((p - u) @ seg) / ll, 0.0, 1.0)
    proj = u + t[:, None] * seg
    return np.sqrt(((p - proj) ** 2).sum(axis=1))


def deviation(path_points, u=None, v=None) -> float:
    """Max distance of the path vertices from the segment between u and v.

    Without u and v the path's own endpoints are used.
    """
    pts = np.atleast_2d(np.asarray(path_points, dtype=np.float64))
    if pts.shape[0] == 0:
        raise ValueError("path must be non-empty")
    if u is None:
        u = pts[0]
    if v is None:
        v = pts[-1]
    return float(point_segment_distance(pts, u, v).max())
