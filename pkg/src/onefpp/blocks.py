"""Good-block checking and the deterministic path-cost certificate inside good blocks.

Block corners below a root block all lie on an integer grid with spacing
A_{k0}/2 anchored at the root's lower corner, so statuses are memoized on integer
keys and vertex membership is decided by integer cell coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _paths
from .geometry import Block, BlockGeometry, Schedule
from .graph import SpatialGraph

# factorial-schedule product is truncated here; the neglected tail is at most k0 / PRODUCT_TRUNCATION
PRODUCT_TRUNCATION = 10**6


class FailureKind(str, Enum):
    LONG_CHEAP_EDGE = "LongCheapEdge"
    TOO_MANY_BAD_CHILDREN = "TooManyBadChildren"
    BASE_CASE_CHEAP_EDGE = "BaseCaseCheapEdge"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FailureReason:
    kind: FailureKind
    edge: int | None = None
    count: int | None = None
    translate: tuple[int, ...] | None = None

    def __str__(self) -> str:
        if self.kind == FailureKind.TOO_MANY_BAD_CHILDREN:
            return f"{self.kind}({self.count})"
        return f"{self.kind}({self.edge})"


@dataclass(frozen=True)
class BlockStatus:
    level: int
    block_id: tuple[int, ...]
    block: Block
    eta: float
    u: float
    good: bool
    failure_reason: FailureReason | None = None
    # distinct bad children over all translates; only tracked for good blocks
    bad_children: int = 0
    checker: "BlockChecker | None" = field(default=None, repr=False, compare=False)


class BlockChecker:
    """Memoized goodness checker for one root block and its descendants."""

    def __init__(self, graph: SpatialGraph, geom: BlockGeometry, root: Block, eta: float, u: float):
        if not (0 < eta <= 1):
            raise ValueError("eta must lie in (0, 1]")
        if not (u > 0):
            raise ValueError("u must be positive")
        d = graph.d
        self.k0 = geom.base_level(d)
        if root.level < self.k0:
            raise ValueError(f"level {root.level} is below the base level {self.k0}")
        if not math.isclose(root.side, geom.side(root.level), rel_tol=1e-12):
            raise ValueError("block side does not match its level")
        lo = np.asarray(root.lower, dtype=np.float64)
        if graph.domain.kind == "lattice":
            reach = math.floor(graph.domain.half_side + 1e-12) + 0.5
        else:
            reach = graph.domain.half_side
        if np.any(lo < -reach - 1e-9) or np.any(lo + root.side > reach + 1e-9):
            raise ValueError("block is not inside the graph domain")
        self.graph = graph
        self.geom = geom
        self.root = root
        self.eta = float(eta)
        self.u = float(u)
        self.d = d
        self.unit = geom.side(self.k0) / 2.0
        self.origin = lo
        self.memo: dict[tuple[int, tuple[int, ...]], BlockStatus] = {}
        pos = graph.positions
        self.vcell = np.floor((pos - lo) / self.unit).astype(np.int64)
        if graph.active is not None:
            # inactive ids belong to no block
            self.vcell[~graph.active] = np.iinfo(np.int64).min // 4
        cu = self.vcell[graph.edges_u]
        cv = self.vcell[graph.edges_v]
        self.emin = np.minimum(cu, cv)
        self.emax = np.maximum(cu, cv)
        diff = pos[graph.edges_u] - pos[graph.edges_v]
        self.elen = np.sqrt((diff**2).sum(axis=1))
        self._base = None
        self._cands: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def units(self, k: int) -> int:
        return int(round(self.geom.side(k) / self.unit))

    def key_of(self, block: Block) -> tuple[int, ...]:
        rel = (np.asarray(block.lower) - self.origin) / self.unit
        key = np.round(rel).astype(np.int64)
        if not np.allclose(rel, key, atol=1e-6):
            raise ValueError("block is not aligned with the root grid")
        return tuple(int(c) for c in key)

    def block_at(self, k: int, key) -> Block:
        lower = tuple(float(o + c * self.unit) for o, c in zip(self.origin, key))
        return Block(k, lower, self.geom.side(k))

    def vertex_mask(self, k: int, key) -> np.ndarray:
        lo = np.asarray(key, dtype=np.int64)
        return np.all((self.vcell >= lo) & (self.vcell < lo + self.units(k)), axis=1)

    def _base_table(self) -> dict:
        """Cheapest internal edge for every base block that has one."""
        if self._base is not None:
            return self._base
        span = self.emax - self.emin
        ok = np.all(span <= 1, axis=1)
        idx = np.flatnonzero(ok)
        keys, eids = [], []
        for bits in itertools.product((0, 1), repeat=self.d):
            b = np.asarray(bits)
            valid = np.all((span[idx] == 0) | (b == 0), axis=1)
            sel = idx[valid]
            keys.append(self.emin[sel] - b)
            eids.append(sel)
        table: dict = {}
        if keys:
            allk = np.concatenate(keys)
            alle = np.concatenate(eids)
            costs = self.graph.costs[alle]
            order = np.lexsort((alle, costs))
            for key, e in zip(map(tuple, allk[order].tolist()), alle[order].tolist()):
                if key not in table:
                    table[key] = (float(self.graph.costs[e]), int(e))
        self._base = table
        return table

    def _candidates(self, k: int):
        """Edges that would violate property (i) at level k if internal."""
        if k not in self._cands:
            long_ = self.geom.side(k - 1) / 100.0
            cheap = self.u * self.geom.side(k) ** self.eta
            sel = np.flatnonzero((self.elen > long_) & (self.graph.costs < cheap))
            self._cands[k] = (sel, self.emin[sel], self.emax[sel])
        return self._cands[k]

    def status(self, block: Block) -> BlockStatus:
        return self._status(block.level, self.key_of(block))

    def _status(self, k: int, key: tuple[int, ...]) -> BlockStatus:
        memo_key = (k, key)
        hit = self.memo.get(memo_key)
        if hit is not None:
            return hit
        blk = self.block_at(k, key)
        if k == self.k0:
            cheapest = self._base_table().get(key)
            if cheapest is not None and cheapest[0] < self.u:
                st = BlockStatus(k, key, blk, self.eta, self.u, False,
                                 FailureReason(FailureKind.BASE_CASE_CHEAP_EDGE, edge=cheapest[1]), 0, self)
            else:
                st = BlockStatus(k, key, blk, self.eta, self.u, True, None, 0, self)
            self.memo[memo_key] = st
            return st
        size = self.units(k)
        child = self.units(k - 1)
        half = child // 2
        ratio = self.geom.ratio(k)
        limit = 3**self.d
        sel, cmin, cmax = self._candidates(k)
        bad_union: set = set()
        reason = None
        for j in itertools.product((-1, 0, 1), repeat=self.d):
            corner = np.asarray(key, dtype=np.int64) + half * np.asarray(j, dtype=np.int64)
            if sel.size:
                inside = np.all((cmin >= corner) & (cmax < corner + size), axis=1)
                hits = np.flatnonzero(inside)
                if hits.size:
                    reason = FailureReason(FailureKind.LONG_CHEAP_EDGE, edge=int(sel[hits].min()), translate=j)
                    break
            bad = []
            for i in itertools.product(range(ratio), repeat=self.d):
                ck = tuple(int(c) for c in corner + child * np.asarray(i, dtype=np.int64))
                if not self._status(k - 1, ck).good:
                    bad.append(ck)
            if len(bad) > limit:
                reason = FailureReason(FailureKind.TOO_MANY_BAD_CHILDREN, count=len(bad), translate=j)
                break
            bad_union.update(bad)
        if reason is None:
            st = BlockStatus(k, key, blk, self.eta, self.u, True, None, len(bad_union), self)
        else:
            st = BlockStatus(k, key, blk, self.eta, self.u, False, reason, 0, self)
        self.memo[memo_key] = st
        return st

    def report(self) -> list[dict]:
        """Rows (level, block_index, good, failure_reason) for every checked block."""
        rows = []
        for (k, key), st in sorted(self.memo.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
            rows.append({
                "level": k,
                "block_index": "(" + ",".join(str(c) for c in key) + ")",
                "good": st.good,
                "failure_reason": "None" if st.failure_reason is None else str(st.failure_reason),
            })
        return rows


def check_block_good(graph: SpatialGraph, geom: BlockGeometry, k: int, block: Block, eta: float,
                     u: float) -> BlockStatus:
    """Goodness of a k-block; children and translates are checked recursively and memoized."""
    if block.level != k:
        raise ValueError("block level and k differ")
    return BlockChecker(graph, geom, block, eta, u).status(block)


def centred_block(geom: BlockGeometry, k: int, d: int, centre=None) -> Block:
    a = geom.side(k)
    c = np.zeros(d) if centre is None else np.asarray(centre, dtype=np.float64)
    return Block(k, tuple(float(x - a / 2) for x in c), a)


def base_constant(geom: BlockGeometry, d: int, u: float) -> float:
    """C = u / (A_{k0} sqrt d), the base-level constant; needs A_{k0} >= 1."""
    a0 = geom.side(geom.base_level(d))
    if a0 < 1:
        raise ValueError("the base block side must be at least 1")
    return u / (a0 * math.sqrt(d))


def factorial_product(k0: int, h_max: int = PRODUCT_TRUNCATION) -> tuple[float, float]:
    """prod_{h=k0}^{h_max} (1 - k0/h^2) and a bound on the relative truncation error.

    The neglected factors multiply to at least 1 - k0/h_max.
    """
    h = np.arange(k0, h_max + 1, dtype=np.float64)
    terms = 1.0 - k0 / h**2
    if np.any(terms <= 0):
        return 0.0, 0.0
    return float(np.exp(np.log(terms).sum())), k0 / h_max


def level_factor(d: int, bad: int, ratio: int) -> float:
    """Per-level loss factor of the certificate for a level with at most `bad` bad children.

    Without bad children an optimal path stays one segment and nothing is lost.
    """
    if bad == 0:
        return 1.0
    return max(0.0, 1.0 - (32 * d * bad + bad + 1) / ratio)


@dataclass(frozen=True)
class Certificate:
    u_star: float
    base_constant: float
    factors: tuple[float, ...]
    truncation_error: float
    method: str


def certificate(status: BlockStatus) -> Certificate:
    """The constant u* for which every qualifying path in the good block costs at least u*|x-y|^eta.

    The factorial schedule at its native base level uses the fixed product over h >= k0;
    otherwise the product runs over the checked levels with the observed bad-child counts.
    """
    if not status.good:
        raise ValueError("block is not certified good")
    ch = status.checker
    geom, d = ch.geom, ch.d
    C = base_constant(geom, d, status.u)
    k0 = ch.k0
    if geom.schedule == Schedule.FACTORIAL and k0 >= 16 * 30**d:
        prod, err = factorial_product(k0)
        return Certificate(C * prod, C, (prod,), err, "factorial")
    worst: dict[int, int] = {}
    for (k, _), st in ch.memo.items():
        if st.good and k > k0:
            worst[k] = max(worst.get(k, 0), st.bad_children)
    factors = tuple(level_factor(d, worst.get(k, 0), geom.ratio(k)) for k in range(k0 + 1, status.level + 1))
    u_star = C * math.prod(f**status.eta for f in factors)
    return Certificate(u_star, C, factors, 0.0, "observed")


@dataclass(frozen=True)
class PathCheck:
    source: int
    target: int
    holds: bool
    cost: float
    bound: float
    path: tuple[int, ...] = ()


def _block_vertices(status: BlockStatus) -> np.ndarray:
    ch = status.checker
    return ch.vertex_mask(status.level, status.block_id)


def _validate_pair(status: BlockStatus, x: int, y: int, inside: np.ndarray) -> float:
    pos = status.checker.graph.positions
    if not (inside[x] and inside[y]):
        raise ValueError("both endpoints must lie in the block")
    dist = float(np.linalg.norm(pos[x] - pos[y]))
    if not dist > status.block.side / 16:
        raise ValueError("endpoints are too close: need |x-y| > A_k/16")
    return dist


def verify_path_lower_bound(status: BlockStatus, x: int, y: int) -> PathCheck:
    """Optimal cost from x to y using only vertices of the block, against u*|x-y|^eta."""
    cert = certificate(status)
    inside = _block_vertices(status)
    dist = _validate_pair(status, x, y, inside)
    g = status.checker.graph
    indptr, nbr, eidx = g.csr
    dh, pred, _ = _paths.dijkstra(indptr, nbr, eidx, g.costs, int(x), int(y), math.inf, inside, True)
    bound = cert.u_star * dist**status.eta
    cost = float(dh[y])
    if cost >= bound:
        return PathCheck(int(x), int(y), True, cost, bound)
    path = [int(y)]
    while path[-1] != x:
        path.append(int(pred[path[-1]]))
    return PathCheck(int(x), int(y), False, cost, bound, tuple(reversed(path)))


@dataclass(frozen=True)
class BlockVerification:
    certificate: Certificate
    pairs_checked: int
    violations: tuple[PathCheck, ...]
    min_ratio: float

    @property
    def holds(self) -> bool:
        return not self.violations


def verify_all_pairs(status: BlockStatus) -> BlockVerification:
    """Check every pair of block vertices at distance > A_k/16, one restricted search per source."""
    cert = certificate(status)
    inside = _block_vertices(status)
    ids = np.flatnonzero(inside)
    g = status.checker.graph
    pos = g.positions
    indptr, nbr, eidx = g.csr
    thr = status.block.side / 16
    checked = 0
    bad = []
    min_ratio = math.inf
    for a, x in enumerate(ids[:-1]):
        others = ids[a + 1:]
        dist = np.sqrt(((pos[others] - pos[x]) ** 2).sum(axis=1))
        far = dist > thr
        if not np.any(far):
            continue
        dh, pred, _ = _paths.dijkstra(indptr, nbr, eidx, g.costs, int(x), -1, math.inf, inside, True)
        ys = others[far]
        dd = dist[far]
        scaled = dd**status.eta
        checked += ys.size
        with np.errstate(invalid="ignore"):
            ratios = dh[ys] / scaled
        min_ratio = min(min_ratio, float(ratios.min()))
        for i in np.flatnonzero(dh[ys] < cert.u_star * scaled):
            y = int(ys[i])
            path = [y]
            while path[-1] != x:
                path.append(int(pred[path[-1]]))
            bad.append(PathCheck(int(x), y, False, float(dh[y]), cert.u_star * float(scaled[i]),
                                 tuple(reversed(path))))
    return BlockVerification(cert, checked, tuple(bad), min_ratio)
