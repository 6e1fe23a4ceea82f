"""Graph generation: weights, edges via the connection kernel, L values and costs."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from . import _gen
from ._rng import SALT_L, SALT_WEIGHT, pair_uniforms, vertex_uniforms
from .distributions import LDistribution, check_compatible, sample_weight
from .geometry import Domain, DomainKind, lattice_index, lattice_points, sample_ppp
from .graph import RootConditioning, RootKind, SpatialGraph, edge_costs
from .params import ModelParams, validate_params

DEFAULT_MAX_EDGES = 60_000_000
NAIVE_MAX_PAIRS = 2_000_000_000
# near-field radius as a multiple of the radius where the kernel saturates
NEAR_FACTOR = 2.0
# expected candidate count below which the remaining shells are merged into one
TAIL_MASS = 0.1


class Mode(str, Enum):
    NAIVE = "naive"
    CELL = "cell"

    def __str__(self) -> str:
        return self.value


class MemoryBudgetError(RuntimeError):
    pass


def connection_prob(x_diff, w1: float, w2: float, par: ModelParams) -> float:
    """c_lower * min(1, w1 w2 / |x|^d)^alpha, or the threshold kernel when alpha is INFINITE."""
    x = np.atleast_1d(np.asarray(x_diff, dtype=np.float64))
    dist2 = float(x @ x)
    return float(_gen.kernel_prob(dist2, w1 * w2, par.d, float(par.alpha) if not par.alpha_infinite else 0.0,
                                  par.c_lower, par.c_prime or 1.0, par.alpha_infinite))


def expected_edge_estimate(n: int, par: ModelParams) -> float:
    """Rough expected edge count, used only for the memory guard."""
    ew = (par.tau - 1.0) / (par.tau - 2.0)
    vol = math.pi ** (par.d / 2) / math.gamma(par.d / 2 + 1)
    if par.alpha_infinite:
        per = vol * ew * ew / (par.c_prime or 1.0)
    else:
        per = par.c_lower * vol * ew * ew * par.alpha / (par.alpha - 1.0)
    return 0.5 * n * (per + 2 * par.d)


def _vertex_positions(domain: Domain, seed: int, roots: RootConditioning) -> tuple[np.ndarray, tuple[int, ...]]:
    d = domain.d
    if domain.kind == DomainKind.LATTICE:
        pos = lattice_points(domain)
        ids = []
        if roots.kind != RootKind.NONE:
            ids.append(lattice_index(domain, (0,) * d))
        if roots.kind == RootKind.TWO_ROOTS:
            ids.append(lattice_index(domain, roots.x))
        return pos, tuple(ids)
    pts = sample_ppp(domain, 1.0, seed)
    extra = []
    if roots.kind != RootKind.NONE:
        extra.append(np.zeros(d))
    if roots.kind == RootKind.TWO_ROOTS:
        x = np.asarray(roots.x, dtype=np.float64)
        if x.shape != (d,) or np.any(np.abs(x) > domain.half_side):
            raise ValueError("second root must lie in the domain")
        extra.append(x)
    if extra:
        pts = np.vstack([np.array(extra), pts])
    return pts, tuple(range(len(extra)))


def _cell_structures(pos: np.ndarray, w: np.ndarray, domain: Domain, cell_side: float):
    n, d = pos.shape
    if domain.kind == DomainKind.LATTICE:
        lo = np.full(d, -math.floor(domain.half_side + 1e-12) - 0.5)
        extent = 2 * math.floor(domain.half_side + 1e-12) + 1
    else:
        lo = np.full(d, -domain.half_side)
        extent = 2 * domain.half_side
    g = max(1, int(math.ceil(extent / cell_side)))
    G = np.full(d, g, dtype=np.int64)
    cc = np.floor((pos - lo) / cell_side).astype(np.int64)
    np.clip(cc, 0, g - 1, out=cc)
    flat = np.zeros(n, dtype=np.int64)
    for k in range(d):
        flat = flat * g + cc[:, k]
    layer = np.maximum(np.floor(np.log2(w)).astype(np.int64), 0)
    nlayers = int(layer.max()) + 1 if n else 1
    ncells = g**d
    order = np.lexsort((np.arange(n), flat, layer)).astype(np.int64)
    layer_ptr = np.zeros(nlayers + 1, dtype=np.int64)
    np.cumsum(np.bincount(layer, minlength=nlayers), out=layer_ptr[1:])
    # per layer CSR over cells, stored with global offsets into `order`
    counts = np.zeros((nlayers, ncells), dtype=np.int64)
    np.add.at(counts, (layer, flat), 1)
    cell_start = np.zeros((nlayers, ncells + 1), dtype=np.int64)
    np.cumsum(counts, axis=1, out=cell_start[:, 1:])
    cell_start += layer_ptr[:-1, None]
    # per layer summed-area table with a zero margin on the low side of each axis
    sat = np.zeros((nlayers,) + (g + 1,) * d, dtype=np.int64)
    inner = counts.reshape((nlayers,) + (g,) * d)
    for k in range(d):
        inner = np.cumsum(inner, axis=k + 1)
    sat[(slice(None),) + (slice(1, None),) * d] = inner
    wmax = np.ones(nlayers)
    np.maximum.at(wmax, layer, w)
    return cc, layer, order, layer_ptr, cell_start.ravel(), sat.ravel(), G, wmax


def generate_graph(
    domain: Domain,
    par: ModelParams,
    l_spec: LDistribution | None = None,
    seed: int = 0,
    mode: Mode | str = Mode.CELL,
    root_conditioning: RootConditioning | None = None,
    max_edges: float = DEFAULT_MAX_EDGES,
    cell_side: float = 1.0,
) -> SpatialGraph:
    validate_params(par)
    if l_spec is None:
        l_spec = LDistribution.power(par.beta) if not par.beta_infinite else LDistribution.constant(1.0)
    check_compatible(par, l_spec)
    if domain.d != par.d:
        raise ValueError("domain and parameter dimensions differ")
    if par.c_lower > 1:
        raise ValueError("c_lower must not exceed 1 for the canonical kernel")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    mode = Mode(mode)
    roots = root_conditioning or RootConditioning.none()

    pos, root_ids = _vertex_positions(domain, seed, roots)
    n = pos.shape[0]
    ids = np.arange(n, dtype=np.int64)
    w = sample_weight(par.tau, vertex_uniforms(seed, SALT_WEIGHT, ids)) if n else np.empty(0)
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))

    est = expected_edge_estimate(n, par)
    if est > max_edges:
        raise MemoryBudgetError(f"expected about {est:.3g} edges, above the limit {max_edges:.3g}")

    alpha = 0.0 if par.alpha_infinite else float(par.alpha)
    cprime = float(par.c_prime) if par.c_prime is not None else 1.0
    if n < 2:
        eu = ev = np.empty(0, dtype=np.int64)
    elif mode == Mode.NAIVE:
        if n * (n - 1) // 2 > NAIVE_MAX_PAIRS:
            raise MemoryBudgetError("too many pairs for the naive generator; use the cell mode")
        if domain.kind == DomainKind.LATTICE:
            period = float(2 * math.floor(domain.half_side + 1e-12) + 1)
        else:
            period = domain.side
        eu, ev = _gen.naive_edges(pos, w, seed, alpha, par.c_lower, cprime, par.alpha_infinite,
                                  domain.torus_wrap, period)
    else:
        if domain.torus_wrap:
            raise ValueError("torus identification is only supported by the naive generator")
        cc, layer, order, layer_ptr, cell_start, sat, G, wmax = _cell_structures(pos, w, domain, cell_side)
        eu, ev = _gen.cell_edges(pos, w, cc, layer, order, layer_ptr, cell_start, sat, G,
                                 float(cell_side), wmax, seed, alpha, par.c_lower, cprime,
                                 par.alpha_infinite, NEAR_FACTOR, TAIL_MASS)
    order = np.lexsort((ev, eu))
    eu = np.ascontiguousarray(eu[order])
    ev = np.ascontiguousarray(ev[order])
    lu = pair_uniforms(seed, SALT_L, eu, ev)
    lv = np.atleast_1d(np.asarray(l_spec.sample(lu), dtype=np.float64))
    costs = edge_costs(lv, w[eu], w[ev], par.mu)
    return SpatialGraph(domain, par, pos, w, eu, ev, lv, costs, seed, l_spec, roots, root_ids)


def subgraph_GM(graph: SpatialGraph, M: float, mu: float | None = None) -> SpatialGraph:
    """Vertices with weight in [M, 2M], edges among them with cost <= M^(3 mu)."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if mu is None:
        mu = graph.params.mu
    g = graph if mu == graph.params.mu else graph.with_mu(mu)
    vmask = (g.weights >= M) & (g.weights <= 2 * M)
    emask = g.costs <= M ** (3 * mu)
    return g.edge_subgraph(vmask, emask)


def vertex_mask_GM(graph: SpatialGraph, M: float) -> np.ndarray:
    return (graph.weights >= M) & (graph.weights <= 2 * M)
