"""Bond percolation on lattice boxes and the box renormalisation of dense geometric graphs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

from . import _paths, _perc
from .geometry import BoxingScheme, DomainKind, point_segment_distance
from .graph import SpatialGraph


@dataclass(frozen=True, eq=False)
class PercConfig:
    """Bond configuration on {0..side-1}^d with cluster labels.

    open_bonds[k, i] is the bond from site i to i + e_k; sites are numbered in C order.
    labels[i] is the smallest site id in the cluster of i. `largest` is the label of
    the largest eligible cluster (-1 if there is none), ties going to the smaller label.
    """

    d: int
    side: int
    p: float
    open_bonds: np.ndarray
    labels: np.ndarray
    largest: int
    seed: int | None = None

    @property
    def n_sites(self) -> int:
        return self.side**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.d

    @cached_property
    def largest_mask(self) -> np.ndarray:
        if self.largest < 0:
            return np.zeros(self.n_sites, dtype=bool)
        return self.labels == self.largest

    @property
    def largest_size(self) -> int:
        return int(self.largest_mask.sum())

    def coords(self, i) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(i), self.shape), axis=-1)

    def index(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64)
        return np.ravel_multi_index(tuple(np.moveaxis(c, -1, 0)), self.shape)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        u, v = open_bond_list(self.d, self.side, self.open_bonds)
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n_sites + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n_sites), out=indptr[1:])
        return indptr, dst[order].astype(np.int64)


def valid_bonds(d: int, side: int) -> np.ndarray:
    """Mask of bonds whose far end lies inside the box."""
    grid = np.indices((side,) * d).reshape(d, -1)
    return grid < side - 1


def open_bond_list(d: int, side: int, open_bonds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ob = open_bonds & valid_bonds(d, side)
    us, vs = [], []
    for k in range(d):
        i = np.flatnonzero(ob[k])
        us.append(i)
        vs.append(i + side ** (d - 1 - k))
    return np.concatenate(us).astype(np.int64), np.concatenate(vs).astype(np.int64)


def _largest_label(labels: np.ndarray, eligible: np.ndarray | None) -> int:
    lab = labels if eligible is None else labels[eligible]
    if lab.size == 0:
        return -1
    counts = np.bincount(lab, minlength=labels.shape[0])
    return int(np.argmax(counts))


def from_open_bonds(d: int, side: int, open_bonds: np.ndarray, p: float, seed: int | None = None,
                    eligible: np.ndarray | None = None) -> PercConfig:
    """Label clusters of a given bond field; `eligible` restricts which sites may form the largest cluster."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    ob = np.ascontiguousarray(np.asarray(open_bonds, dtype=np.bool_) & valid_bonds(d, side))
    labels = _perc.lattice_labels(d, side, ob)
    return PercConfig(d, side, float(p), ob, labels, _largest_label(labels, eligible), seed)


def bond_percolation(d: int, side: int, p: float, seed: int = 0) -> PercConfig:
    """Independent bonds, each open with probability p.

    Bond i is open iff U_i < p for uniforms drawn from the seed, so configurations
    with the same seed increase with p.
    """
    if d < 1 or side < 1:
        raise ValueError("need d >= 1 and side >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    u = np.random.default_rng(seed).random((d, side**d))
    return from_open_bonds(d, side, u < p, p, seed)


def bfs_labels(config: PercConfig) -> np.ndarray:
    """Cluster labels by breadth-first search; an independent route to the union-find labels."""
    indptr, nbr = config.csr
    n = config.n_sites
    labels = np.full(n, -1, dtype=np.int64)
    empty = np.zeros(1, dtype=np.bool_)
    for s in range(n):
        if labels[s] >= 0:
            continue
        hops, _ = _paths.bfs(indptr, nbr, s, empty, False)
        labels[hops >= 0] = s
    return labels


def _ball_kernel(rho: float, d: int) -> np.ndarray:
    m = int(math.floor(rho))
    grid = np.indices((2 * m + 1,) * d) - m
    return ((grid**2).sum(axis=0) <= rho * rho).astype(np.int64)


def perc_local_density(config: PercConfig, r: float, rho: float, centre=None) -> float:
    """min over lattice y in B_r(centre) of |B_rho(y) & C*| / |B_rho(y)|, C* the largest cluster."""
    d, side = config.d, config.side
    c = np.full(d, side // 2) if centre is None else np.asarray(centre, dtype=np.int64)
    reach = int(math.floor(r)) + int(math.floor(rho))
    if np.any(c - reach < 0) or np.any(c + reach > side - 1):
        raise ValueError("balls of radius r + rho around the centre leave the box")
    kern = _ball_kernel(rho, d)
    field = config.largest_mask.reshape(config.shape).astype(np.int64)
    counts = ndimage.correlate(field, kern, mode="constant", cval=0)
    rr = int(math.floor(r))
    offs = np.indices((2 * rr + 1,) * d).reshape(d, -1).T - rr
    offs = offs[(offs**2).sum(axis=1) <= r * r]
    ys = offs + c
    vals = counts[tuple(ys.T)]
    return float(vals.min() / kern.sum())


@dataclass(frozen=True)
class LinearPathRow:
    source: int
    target: int
    euclid: float
    hops: int
    hop_ratio: float
    deviation_ratio: float
    exceeds: bool

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "euclid": self.euclid,
            "hops": self.hops,
            "hop_ratio": self.hop_ratio,
            "deviation_ratio": self.deviation_ratio,
            "exceeds": self.exceeds,
        }


def perc_linear_paths(config: PercConfig, pairs, kappa: float, zeta: float) -> list[LinearPathRow]:
    """Hop length and deviation of a BFS shortest path, both relative to |x-y|."""
    indptr, nbr = config.csr
    mask = config.largest_mask
    empty = np.zeros(1, dtype=np.bool_)
    rows = []
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for x, y in pairs:
        x, y = int(x), int(y)
        if not (mask[x] and mask[y]):
            raise ValueError(f"pair ({x}, {y}) has an endpoint outside the largest cluster")
        if x == y:
            raise ValueError("pair endpoints must differ")
        if x not in cache:
            cache[x] = _paths.bfs(indptr, nbr, x, empty, False)
        hops, pred = cache[x]
        path = [y]
        while path[-1] != x:
            path.append(int(pred[path[-1]]))
        pts = config.coords(np.array(path)).astype(np.float64)
        euclid = float(np.linalg.norm(pts[0] - pts[-1]))
        dev = float(point_segment_distance(pts, pts[-1], pts[0]).max())
        hr = int(hops[y]) / euclid
        dr = dev / euclid
        rows.append(LinearPathRow(x, y, euclid, int(hops[y]), hr, dr, bool(hr > kappa or dr > zeta)))
    return rows


def sample_far_pairs(config: PercConfig, count: int, min_dist: float, seed: int = 0,
                     max_tries: int = 1000) -> list[tuple[int, int]]:
    """Uniform pairs from the largest cluster at Euclidean distance at least min_dist."""
    ids = np.flatnonzero(config.largest_mask)
    if ids.size < 2:
        raise ValueError("largest cluster has fewer than two sites")
    rng = np.random.default_rng(seed)
    pairs = []
    tries = 0
    while len(pairs) < count:
        tries += 1
        if tries > max_tries * count:
            raise RuntimeError("could not find enough far pairs")
        a, b = rng.choice(ids, 2, replace=False)
        ca, cb = config.coords(a), config.coords(b)
        if float(np.linalg.norm(ca - cb)) >= min_dist:
            pairs.append((int(a), int(b)))
    return pairs


# dense geometric graphs and the renormalisation

def scheme_side(M: float, d: int) -> float:
    """Box side R = M^(2/d) / sqrt(d) used for the auxiliary graph G_M."""
    return M ** (2.0 / d) / math.sqrt(d)


@dataclass(frozen=True, eq=False)
class BoxGrid:
    """The boxes of a scheme lying fully inside the graph domain, as an n^d grid."""

    scheme: BoxingScheme
    d: int
    first: np.ndarray
    n: int
    vertex_box: np.ndarray
    members: np.ndarray
    ptr: np.ndarray

    @property
    def n_boxes(self) -> int:
        return self.n**self.d

    def box_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.asarray(np.unravel_index(flat, (self.n,) * self.d)) + self.first)

    def vertices(self, flat: int) -> np.ndarray:
        return self.members[self.ptr[flat]:self.ptr[flat + 1]]


def box_grid(graph: SpatialGraph, scheme: BoxingScheme) -> BoxGrid:
    d = graph.d
    if graph.domain.kind == DomainKind.LATTICE:
        reach = math.floor(graph.domain.half_side + 1e-12) + 0.5
    else:
        reach = graph.domain.half_side
    off = scheme._offset(d)
    R = scheme.R
    lo = np.ceil((-reach - off) / R - 1e-12).astype(np.int64)
    hi = np.floor((reach - off) / R + 1e-12).astype(np.int64) - 1
    n = int((hi - lo + 1).min())
    if n < 1:
        raise ValueError("no box of the scheme fits inside the domain")
    z = scheme.box_of(graph.positions) - lo
    inside = np.all((z >= 0) & (z < n), axis=1) & graph.vertex_mask
    flat = np.full(graph.n_vertices, -1, dtype=np.int64)
    flat[inside] = np.ravel_multi_index(tuple(z[inside].T), (n,) * d)
    order = np.flatnonzero(inside)
    order = order[np.argsort(flat[order], kind="stable")]
    ptr = np.zeros(n**d + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat[inside], minlength=n**d), out=ptr[1:])
    return BoxGrid(scheme, d, lo, n, flat, order.astype(np.int64), ptr)


def _cross_pairs(graph: SpatialGraph, grid: BoxGrid) -> set:
    """Unordered pairs of distinct boxes joined by at least one edge."""
    bu = grid.vertex_box[graph.edges_u]
    bv = grid.vertex_box[graph.edges_v]
    keep = (bu >= 0) & (bv >= 0) & (bu != bv)
    a = np.minimum(bu[keep], bv[keep])
    b = np.maximum(bu[keep], bv[keep])
    return set(zip(a.tolist(), b.tolist()))


def _neighbour_pairs(grid: BoxGrid, nearest_only: bool) -> list[tuple[int, int]]:
    d, n = grid.d, grid.n
    shape = (n,) * d
    offs = []
    for o in itertools.product((-1, 0, 1), repeat=d):
        nz = sum(1 for c in o if c != 0)
        if nz == 0 or (nearest_only and nz != 1):
            continue
        # keep one orientation of each pair
        if next(c for c in o if c != 0) > 0:
            offs.append(np.asarray(o))
    idx = np.indices(shape).reshape(d, -1).T
    out = []
    for o in offs:
        other = idx + o
        ok = np.all((other >= 0) & (other < n), axis=1)
        a = np.ravel_multi_index(tuple(idx[ok].T), shape)
        b = np.ravel_multi_index(tuple(other[ok].T), shape)
        out.extend(zip(np.minimum(a, b).tolist(), np.maximum(a, b).tolist()))
    return out


@dataclass(frozen=True)
class DenseGeomEstimate:
    R: float
    D: int
    fail_connected: float
    fail_cross: float
    fail_diameter: float
    n_boxes: int
    n_neighbour_pairs: int

    @property
    def max_rate(self) -> float:
        return max(self.fail_connected, self.fail_cross, self.fail_diameter)

    def as_dict(self) -> dict:
        return {
            "R": self.R,
            "D": self.D,
            "fail_connected": self.fail_connected,
            "fail_cross": self.fail_cross,
            "fail_diameter": self.fail_diameter,
            "n_boxes": self.n_boxes,
            "n_neighbour_pairs": self.n_neighbour_pairs,
        }


def _box_stats(graph: SpatialGraph, grid: BoxGrid):
    indptr, nbr, _ = graph.csr
    return _perc.box_stats(grid.vertex_box, grid.members, grid.ptr, indptr, nbr)


def dense_geometric_check(graph_M: SpatialGraph, scheme: BoxingScheme, D: int) -> DenseGeomEstimate:
    """Empirical failure rates of box connectivity, cross edges between neighbouring boxes and diameter.

    An empty box counts as failing both connectivity and the diameter bound.
    Neighbouring boxes are those whose closures meet (3^d - 1 per box).
    """
    grid = box_grid(graph_M, scheme)
    count, connected, diam = _box_stats(graph_M, grid)
    good_conn = connected & (count > 0)
    good_diam = good_conn & (diam <= D)
    pairs = _neighbour_pairs(grid, nearest_only=False)
    cross = _cross_pairs(graph_M, grid)
    miss = sum(1 for pr in pairs if pr not in cross)
    nb = grid.n_boxes
    return DenseGeomEstimate(
        float(scheme.R), int(D),
        float(1.0 - good_conn.mean()),
        float(miss / len(pairs)) if pairs else 0.0,
        float(1.0 - good_diam.mean()),
        int(nb), len(pairs),
    )


def box_counts(graph_M: SpatialGraph, scheme: BoxingScheme) -> np.ndarray:
    grid = box_grid(graph_M, scheme)
    return np.diff(grid.ptr)


def choose_K(graph_M: SpatialGraph, scheme: BoxingScheme, epsilon: float, samples: int = 1000,
             seed: int = 0) -> int:
    """Smallest K with empirical P(box count <= K) >= 1 - epsilon over up to `samples` boxes."""
    counts = box_counts(graph_M, scheme)
    if counts.size > samples:
        counts = np.random.default_rng(seed).choice(counts, samples, replace=False)
    return int(np.quantile(counts, 1.0 - epsilon, method="inverted_cdf"))


@dataclass(frozen=True, eq=False)
class RenormalisedRecord:
    grid: BoxGrid
    K: int
    counts: np.ndarray
    occupied: np.ndarray
    perc: PercConfig
    open_frequency: float

    def bond_checks(self, graph_M: SpatialGraph) -> bool:
        """Every open bond joins two occupied boxes that share an edge."""
        cross = _cross_pairs(graph_M, self.grid)
        u, v = open_bond_list(self.perc.d, self.perc.side, self.perc.open_bonds)
        for a, b in zip(u.tolist(), v.tolist()):
            if not (self.occupied[a] and self.occupied[b] and (min(a, b), max(a, b)) in cross):
                return False
            if not (0 < self.counts[a] <= self.K and 0 < self.counts[b] <= self.K):
                return False
        return True


def couple_GM_to_bond(graph_M: SpatialGraph, scheme: BoxingScheme, K: int) -> RenormalisedRecord:
    """Site z occupied iff its box has between 1 and K vertices and is connected.

    Bond z z' (nearest neighbours) open iff both sites are occupied and an edge joins
    the two boxes. The largest cluster is taken among occupied sites.
    """
    grid = box_grid(graph_M, scheme)
    count, connected, _ = _box_stats(graph_M, grid)
    occupied = connected & (count > 0) & (count <= K)
    d, n = grid.d, grid.n
    cross = _cross_pairs(graph_M, grid)
    bonds = np.zeros((d, n**d), dtype=np.bool_)
    valid = valid_bonds(d, n)
    for k in range(d):
        step = n ** (d - 1 - k)
        for i in np.flatnonzero(valid[k] & occupied):
            j = i + step
            if occupied[j] and (i, j) in cross:
                bonds[k, i] = True
    total = int(valid.sum())
    freq = float(bonds.sum() / total) if total else 0.0
    perc = from_open_bonds(d, n, bonds, freq, eligible=occupied)
    return RenormalisedRecord(grid, int(K), count, occupied, perc, freq)


def reference_retention(estimate: DenseGeomEstimate, d: int) -> dict:
    """The 1 - 5 eps and 1 - 20 d eps reference retention levels for eps = the largest failure rate."""
    eps = estimate.max_rate
    return {"one_minus_5eps": 1.0 - 5.0 * eps, "one_minus_20d_eps": 1.0 - 20.0 * d * eps}


def h_infinity(graph_M: SpatialGraph, scheme: BoxingScheme, record: RenormalisedRecord) -> np.ndarray:
    """Sorted ids of vertices in boxes whose site lies in the largest renormalised cluster."""
    if scheme != record.grid.scheme:
        raise ValueError("record was built with a different boxing scheme")
    mask = record.perc.largest_mask
    out = [record.grid.vertices(int(z)) for z in np.flatnonzero(mask)]
    if not out:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(out))
