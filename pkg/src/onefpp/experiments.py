"""Seeded experiment runners. Each returns named tables of rows, merged in seed order."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import blocks as blk
from . import census as cen
from . import percolation as perc
from .config import ExperimentConfig, PairRule
from .fitting import FitModel, ScalingFit, estimate_exponent, hill_estimator, hill_k
from .generate import generate_graph, subgraph_GM
from .geometry import BlockGeometry, BoxingScheme, Domain
from .graph import RootConditioning, SpatialGraph
from .metric import ball_growth_profile, distance_rows

PAIR_SALT = 0x5EED


class CouplingViolation(RuntimeError):
    """Raised when a cost distance decreases as mu increases on a fixed realisation."""


def map_seeds(fn, seeds, threads: int = 1) -> list:
    """fn applied to each seed; results in seed order whatever the completion order."""
    if threads <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def largest_component(graph: SpatialGraph) -> np.ndarray:
    """Mask of the largest connected component (ties go to the one holding the smaller id)."""
    n = graph.n_vertices
    adj = coo_matrix((np.ones(graph.n_edges), (graph.edges_u, graph.edges_v)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    if graph.active is not None:
        labels = np.where(graph.active, labels, -1)
    valid = labels[labels >= 0]
    if valid.size == 0:
        return np.zeros(n, dtype=bool)
    sizes = np.bincount(valid)
    best = int(np.argmax(sizes))
    return labels == best


def root_to_shell_pairs(graph: SpatialGraph, root: int, radii, per_radius: int, rng,
                        component: np.ndarray) -> tuple[list[tuple[float, int, int]], list[float]]:
    """For each radius, the component vertices closest to uniform random points on the sphere.

    Returns ((radius, root, target) triples, radii where no target was found).
    """
    d = graph.d
    ids = np.flatnonzero(component)
    ids = ids[ids != root]
    missing = []
    out = []
    if not component[root] or ids.size == 0:
        return out, [float(r) for r in radii]
    tree = cKDTree(graph.positions[ids])
    origin = graph.positions[root]
    for r in radii:
        found = 0
        for _ in range(per_radius):
            v = rng.standard_normal(d)
            v /= np.linalg.norm(v)
            _, j = tree.query(origin + r * v)
            out.append((float(r), int(root), int(ids[j])))
            found += 1
        if found == 0:
            missing.append(float(r))
    return out, missing


def uniform_pairs_in_giant(component: np.ndarray, count: int, rng) -> list[tuple[float, int, int]]:
    ids = np.flatnonzero(component)
    if ids.size < 2:
        return []
    out = []
    for _ in range(count):
        a, b = rng.choice(ids, 2, replace=False)
        out.append((math.nan, int(a), int(b)))
    return out


def _rooted_graph(cfg: ExperimentConfig, seed: int, mu: float | None = None) -> SpatialGraph:
    par = cfg.model_params()
    if mu is not None:
        par = par.with_mu(mu)
    return generate_graph(cfg.domain(), par, cfg.l_spec(), seed, cfg.mode, RootConditioning.origin())


def _pairs(graph: SpatialGraph, cfg: ExperimentConfig, seed: int):
    rng = np.random.default_rng([seed, PAIR_SALT])
    comp = largest_component(graph)
    if cfg.pair_rule == PairRule.ROOT_TO_SHELL:
        return root_to_shell_pairs(graph, graph.roots[0], cfg.radii, cfg.targets_per_radius, rng, comp)
    return uniform_pairs_in_giant(comp, cfg.pair_count, rng), []


def _sample_rows(graph: SpatialGraph, triples, seed: int, mu: float) -> list[dict]:
    rows = distance_rows(graph, [(s, t) for _, s, t in triples])
    out = []
    for (r, _, _), row in zip(triples, rows):
        out.append({"seed": seed, "mu": mu, "radius": r, **row})
    return out


def fit_samples(rows: list[dict], model: FitModel | str) -> ScalingFit | None:
    """Fit cost distance against Euclidean distance, skipping unusable samples."""
    xs = [r["euclid"] for r in rows if r["euclid"] > 0 and 0 < r["cost_distance"] < math.inf]
    ys = [r["cost_distance"] for r in rows if r["euclid"] > 0 and 0 < r["cost_distance"] < math.inf]
    if len(xs) < 3 or len(set(xs)) < 2:
        return None
    if FitModel(model) == FitModel.LOGLOGLOG and min(xs) <= 1:
        return None
    return estimate_exponent(xs, ys, model)


def _fit_row(seed, mu, model, fit: ScalingFit | None) -> dict:
    base = {"seed": seed, "mu": mu, "model": str(FitModel(model))}
    if fit is None:
        return {**base, "slope": math.nan, "intercept": math.nan, "half_width": math.nan, "r2": math.nan, "n": 0}
    d = fit.as_dict()
    d.pop("model")
    return {**base, **d}


def run_distance_scaling(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """Samples of (|x|, d_C, hops, deviation) per seed and radius, with per-seed and pooled fits."""
    return run_mu_sweep(replace(cfg, mu_list=(cfg.mu,)), threads)


def _check_coupling(samples: list[dict], mus) -> None:
    by_mu: dict[float, list[float]] = {}
    for r in samples:
        by_mu.setdefault(r["mu"], []).append(r["cost_distance"])
    for m1, m2 in zip(mus, mus[1:]):
        a = np.asarray(by_mu[m1])
        b = np.asarray(by_mu[m2])
        if np.any(b < a):
            i = int(np.flatnonzero(b < a)[0])
            raise CouplingViolation(f"cost distance fell from {a[i]!r} to {b[i]!r} when mu rose from {m1} to {m2}")


def run_mu_sweep(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """One realisation per seed; only the cost exponent changes across the mu list."""
    mus = tuple(cfg.mu_list) if cfg.mu_list else (cfg.mu,)

    def one(seed):
        g = _rooted_graph(cfg, seed, mus[0])
        triples, missing = _pairs(g, cfg, seed)
        samples = []
        for mu in mus:
            gm = g if mu == g.params.mu else g.with_mu(mu)
            samples.extend(_sample_rows(gm, triples, seed, mu))
        _check_coupling(samples, mus)
        fits = []
        for mu in mus:
            rows = [r for r in samples if r["mu"] == mu]
            for model in (FitModel.LOGLOG, FitModel.LOGLOGLOG):
                fits.append(_fit_row(seed, mu, model, fit_samples(rows, model)))
        miss = [{"seed": seed, "radius": r} for r in missing]
        return samples, fits, miss

    results = map_seeds(one, list(cfg.seeds), threads)
    samples = [r for res in results for r in res[0]]
    fits = [r for res in results for r in res[1]]
    missing = [r for res in results for r in res[2]]
    pooled = []
    for mu in mus:
        rows = [r for r in samples if r["mu"] == mu]
        for model in (FitModel.LOGLOG, FitModel.LOGLOGLOG):
            pooled.append(_fit_row("all", mu, model, fit_samples(rows, model)))
    return {"samples": samples, "fits": fits + pooled, "missing": missing}


def run_ball_growth(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """|B_r(root)| over the configured cost radii, with a LogLog fit per seed."""
    radii = np.asarray(cfg.ball_radii, dtype=np.float64)

    def one(seed):
        g = _rooted_graph(cfg, seed)
        sizes = ball_growth_profile(g, g.roots[0], radii)
        rows = [{"seed": seed, "radius": float(r), "ball_size": int(s)} for r, s in zip(radii, sizes)]
        fit = None
        if len(radii) >= 3 and np.all(sizes > 0):
            fit = estimate_exponent(radii, sizes.astype(np.float64), FitModel.LOGLOG)
        return rows, _fit_row(seed, cfg.mu, FitModel.LOGLOG, fit)

    results = map_seeds(one, list(cfg.seeds), threads)
    return {"ball_growth": [r for res in results for r in res[0]], "fits": [res[1] for res in results]}


def run_generate(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list]:
    """Generated graphs per seed with summary rows (size, mean degree, Hill tail index)."""

    def one(seed):
        g = generate_graph(cfg.domain(), cfg.model_params(), cfg.l_spec(), seed, cfg.mode)
        deg = g.degrees()
        n = g.n_vertices
        hill = hill_estimator(deg, hill_k(n)) if n > 4 and np.count_nonzero(deg) > hill_k(n) else math.nan
        row = {"seed": seed, "n_vertices": n, "n_edges": g.n_edges,
               "mean_degree": 2.0 * g.n_edges / n if n else 0.0, "hill_tail_index": hill}
        return g, row

    results = map_seeds(one, list(cfg.seeds), threads)
    return {"graphs": [r[0] for r in results], "summary": [r[1] for r in results]}


def run_census(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """Long-cheap-edge counts per seed in the box of side census_A, against the analytic columns."""
    A = cfg.census_A
    domain = Domain(cfg.d, cfg.domain_kind, A / 2)
    par = cfg.model_params()
    l_spec = cfg.l_spec()

    def one(seed):
        g = generate_graph(domain, par, l_spec, seed, cfg.mode)
        return {N: cen.count_long_cheap_edges(g, cen.CensusQuery(A, N, cfg.census_a, cfg.epsilon))
                for N in cfg.census_N}

    counts = map_seeds(one, list(cfg.seeds), threads)
    per_seed = [{"seed": s, "N": N, "count": c[N]} for s, c in zip(cfg.seeds, counts) for N in cfg.census_N]
    by_n = {N: [c[N] for c in counts] for N in cfg.census_N}
    rows = cen.summarize_census(by_n, A, cfg.census_a, par, l_spec, domain.kind, cfg.census_samples,
                                0, cfg.epsilon)
    summary = []
    for r in rows:
        d = r.as_dict()
        d["radial_integral"] = r.radial_integral
        summary.append(d)
    return {"census_counts": per_seed, "census": summary}


def block_geometry(cfg: ExperimentConfig) -> BlockGeometry:
    return BlockGeometry(cfg.block_base, "geometric", cfg.block_gamma)


def run_blocks(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """Goodness of the centred top block per seed and, for good blocks, the path-cost certificate check."""
    geom = block_geometry(cfg)
    top = blk.centred_block(geom, cfg.block_top_level, cfg.d)

    def one(seed):
        g = generate_graph(cfg.domain(), cfg.model_params(), cfg.l_spec(), seed, cfg.mode)
        checker = blk.BlockChecker(g, geom, top, cfg.block_eta, cfg.block_u)
        st = checker.status(top)
        row = {"seed": seed, "good": st.good,
               "failure_reason": "None" if st.failure_reason is None else str(st.failure_reason),
               "u_star": math.nan, "pairs_checked": 0, "violations": 0, "min_ratio": math.nan}
        if st.good:
            cert = blk.certificate(st)
            row["u_star"] = cert.u_star
            if cfg.block_verify:
                ver = blk.verify_all_pairs(st)
                row.update(pairs_checked=ver.pairs_checked, violations=len(ver.violations),
                           min_ratio=ver.min_ratio)
        report = [{"seed": seed, **r} for r in checker.report()]
        return row, report

    results = map_seeds(one, list(cfg.seeds), threads)
    return {"blocks": [r[0] for r in results], "block_report": [x for r in results for x in r[1]]}


def run_perc(cfg: ExperimentConfig, threads: int = 1) -> dict[str, list[dict]]:
    """Bond percolation statistics per seed and, when gm_M is set, the G_M renormalisation per seed and M."""

    def one(seed):
        c = perc.bond_percolation(cfg.perc_d, cfg.perc_side, cfg.perc_p, seed)
        row = {"seed": seed, "side": cfg.perc_side, "p": cfg.perc_p,
               "largest_density": c.largest_size / c.n_sites,
               "local_density": perc.perc_local_density(c, cfg.perc_r, cfg.perc_rho),
               "max_hop_ratio": math.nan, "max_deviation_ratio": math.nan, "exceeding_pairs": 0}
        if c.largest_size >= 2 and cfg.perc_pairs > 0:
            pairs = perc.sample_far_pairs(c, cfg.perc_pairs, cfg.perc_side / 2, seed)
            lp = perc.perc_linear_paths(c, pairs, cfg.perc_kappa, cfg.perc_zeta)
            row.update(max_hop_ratio=max(r.hop_ratio for r in lp),
                       max_deviation_ratio=max(r.deviation_ratio for r in lp),
                       exceeding_pairs=sum(r.exceeds for r in lp))
        gm_rows = []
        if cfg.gm_M:
            g = generate_graph(cfg.domain(), cfg.model_params(), cfg.l_spec(), seed, cfg.mode)
            gm_rows = gm_statistics(g, cfg.gm_M, cfg.gm_D, cfg.epsilon, seed)
        return row, gm_rows

    results = map_seeds(one, list(cfg.seeds), threads)
    return {"perc": [r[0] for r in results], "gm": [x for r in results for x in r[1]]}


def gm_statistics(graph: SpatialGraph, Ms, D: int, epsilon: float, seed: int) -> list[dict]:
    rows = []
    for M in Ms:
        gm = subgraph_GM(graph, M)
        scheme = BoxingScheme(perc.scheme_side(M, graph.d))
        est = perc.dense_geometric_check(gm, scheme, D)
        K = perc.choose_K(gm, scheme, epsilon, seed=seed)
        rec = perc.couple_GM_to_bond(gm, scheme, K)
        refs = perc.reference_retention(est, graph.d)
        rows.append({"seed": seed, "M": float(M), **est.as_dict(), "K": K,
                     "open_frequency": rec.open_frequency, **refs,
                     "largest_cluster": rec.perc.largest_size,
                     "h_infinity_size": int(perc.h_infinity(gm, scheme, rec).size)})
    return rows
