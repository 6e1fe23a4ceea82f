import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from onefpp import Domain, ModelParams, generate_graph
from onefpp.census import (
    CensusQuery,
    _cost_factor,
    _weight_products,
    closed_form_bound,
    count_long_cheap_edges,
    empirical_n_min,
    expected_census,
    lambda_integrand_mc,
    radial_bound_integral,
    summarize_census,
)
from onefpp.distributions import LDistribution
from onefpp.params import INFINITE
from oracles import brute_force_expected_census, lambda_quadrature_unit_L

PAR = ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.8, beta=1.0)
L1 = LDistribution.power(1.0)


def _one_edge(make_graph, cost):
    return make_graph([[0.0, 0.0], [10.0, 0.0]], [(0, 1)], [cost], half_side=20.0)


def test_empty_graph(make_graph):
    g = make_graph([[0.0, 0.0]], [], half_side=20.0)
    assert count_long_cheap_edges(g, CensusQuery(20, 5, 0.5)) == 0


def test_single_edge_counted(make_graph):
    assert count_long_cheap_edges(_one_edge(make_graph, 5.0), CensusQuery(30, 10, 0.5)) == 1


def test_expensive_edge_not_counted(make_graph):
    assert count_long_cheap_edges(_one_edge(make_graph, 11.0), CensusQuery(30, 10, 0.5)) == 0


def test_endpoint_outside_box(make_graph):
    assert count_long_cheap_edges(_one_edge(make_graph, 5.0), CensusQuery(16, 10, 0.5)) == 0


def test_box_exceeds_domain(make_graph):
    with pytest.raises(ValueError):
        count_long_cheap_edges(_one_edge(make_graph, 5.0), CensusQuery(50, 10, 0.5))


def test_query_validation():
    for args in ((10, 10, 0.5), (10, 5, 0.0), (10, -1, 0.5)):
        with pytest.raises(ValueError):
            CensusQuery(*args)
    with pytest.raises(ValueError):
        CensusQuery(10, 5, 0.5, epsilon=0.0)


def test_count_monotonicity():
    g = generate_graph(Domain(2, "lattice", 40), PAR, seed=1)
    for N in (3.0, 6.0, 12.0):
        counts_a = [count_long_cheap_edges(g, CensusQuery(80, N, a)) for a in (0.1, 0.3, 0.6, 1.0)]
        assert counts_a == sorted(counts_a)
        counts_A = [count_long_cheap_edges(g, CensusQuery(A, N, 0.4)) for A in (20, 40, 60, 80)]
        assert counts_A == sorted(counts_A)
    # a fixed cost cap, with a recomputed for each N
    cap = 8.0
    by_N = [count_long_cheap_edges(g, CensusQuery(80, N, math.log(cap) / (2 * math.log(N))))
            for N in (2.0, 4.0, 8.0, 16.0)]
    assert by_N == sorted(by_N, reverse=True)


def test_cap_irrelevant_when_all_costs_below(make_graph):
    g = generate_graph(Domain(2, "lattice", 30), replace(PAR, mu=0.1), seed=2)
    q = CensusQuery(60, 4, 2.0)
    assert g.costs.max() < q.cost_cap(2)
    inside = np.all(np.abs(g.positions) <= 30, axis=1)
    length = np.linalg.norm(g.positions[g.edges_u] - g.positions[g.edges_v], axis=1)
    uncapped = int(np.sum(inside[g.edges_u] & inside[g.edges_v] & (length >= 4)))
    assert count_long_cheap_edges(g, q) == uncapped


def test_lambda_unit_weights_exact():
    par = replace(PAR, d=2, alpha=3.0)
    val, se = lambda_integrand_mc(4.0, 3.0, 0.5, par, L1, samples=10, unit_weights=True)
    assert val == pytest.approx(min(1, 4.0**-2) ** 3.0 * min(1.0, 3.0 ** (0.5 * 2)), rel=1e-15)
    assert se == 0.0


@pytest.mark.parametrize("r", [1.5, 4.0, 20.0])
def test_lambda_unit_L_matches_quadrature(r):
    # with mu = 0 and L = 1 the cost factor is identically 1
    par = replace(PAR, beta=INFINITE, mu=0.0)
    val, se = lambda_integrand_mc(r, 1.0, 0.5, par, LDistribution.constant(1.0), samples=2_000_000, seed=3)
    ref = lambda_quadrature_unit_L(r, 2, 3.5, 2.5)
    assert abs(val - ref) <= 4 * se


def test_lambda_non_increasing_in_r():
    vals = [lambda_integrand_mc(r, 5.0, 0.3, PAR, L1, samples=20_000, seed=4)[0] for r in (5.0, 10.0, 20.0)]
    assert vals[0] >= vals[1] >= vals[2]


def test_weight_product_tail():
    # P(Z > z) = z^-(tau-1) (1 + (tau-1) log z) for a product of two Pareto weights
    tau = 2.5
    z = _weight_products(replace(PAR, tau=tau), 200_000, 5, False)

    def cdf(x):
        x = np.maximum(x, 1.0)
        return 1 - x ** (1 - tau) * (1 + (tau - 1) * np.log(x))

    assert stats.kstest(z, cdf).pvalue > 0.01


def test_closed_form_bound_a_ge_mu():
    par = replace(PAR, mu=0.5)
    case, val = closed_form_bound(100, 10, 0.7, par, epsilon=0.1)
    assert case == "a>=mu"
    assert val == pytest.approx(100**2 * 10**0.1 * (10 ** (-2 * 2.5) + 10 ** (-2 * 0.5)), rel=1e-14)


def test_closed_form_bound_a_lt_mu():
    case, val = closed_form_bound(100, 10, 0.3, PAR, epsilon=0.1)
    assert case == "a<mu"
    mid = 10 ** (-2 * (2.5 - (0.3 / 0.8) * (3.5 - 1.5)))
    last = 10 ** (-2 * (0.5 + 0.5 * 1.0))
    assert val == pytest.approx(100**2 * 10**0.1 * (10**-5 + mid + last), rel=1e-14)


def test_radial_degenerate_closed_form():
    par = ModelParams(d=1, tau=2.5, alpha=2.0, mu=0.0, beta=INFINITE)
    A, N = 200.0, 10.0
    res = radial_bound_integral(A, N, 0.5, par, LDistribution.constant(1.0), samples=4, unit_weights=True)
    assert res.value == pytest.approx(A * (1 / N - 1 / A), rel=1e-3)
    assert res.converged


def test_radial_integral_reported_with_stderr():
    res = radial_bound_integral(100, 10, 0.3, PAR, L1, samples=20_000, seed=1)
    assert res.value > 0 and res.stderr > 0


@pytest.mark.parametrize("alpha", [3.5, INFINITE])
def test_expected_census_matches_brute_force(alpha):
    par = replace(PAR, alpha=alpha, c_prime=0.5 if math.isinf(alpha) else None, c_lower=0.7, c_upper=0.7)
    A, N, a = 16.0, 3.0, 0.4
    mean, _ = expected_census(A, N, a, par, L1, samples=5_000, seed=9)
    z = _weight_products(par, 5_000, 9, False)
    f = _cost_factor(z, N, a, par, L1)
    if math.isinf(alpha):
        ref = 0.0
        # threshold kernel: brute force with the indicator
        axis = np.arange(-8, 9)
        pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        for i in range(pts.shape[0]):
            diff = pts[i + 1:] - pts[i]
            s = (diff**2).sum(axis=1).astype(float)
            s = s[s >= N * N]
            ref += 0.7 * float(np.mean((z[None, :] >= 0.5 * s[:, None]) * f[None, :], axis=1).sum())
    else:
        ref = brute_force_expected_census(8, 2, N, a, z, f, alpha, 0.7)
    assert mean == pytest.approx(ref, rel=1e-9)


def test_expected_census_matches_simulation():
    A, N, a = 40.0, 4.0, 0.3
    dom = Domain(2, "lattice", A / 2)
    counts = [count_long_cheap_edges(generate_graph(dom, PAR, seed=s), CensusQuery(A, N, a)) for s in range(200)]
    mean, se = expected_census(A, N, a, PAR, L1, samples=200_000)
    emp = np.mean(counts)
    emp_se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(emp - mean) <= 3 * math.hypot(emp_se, se)


def test_continuum_grid_convergence():
    coarse, _ = expected_census(30, 5, 0.3, PAR, L1, kind="continuum", samples=20_000, grid_step=0.5)
    fine, _ = expected_census(30, 5, 0.3, PAR, L1, kind="continuum", samples=20_000, grid_step=0.25)
    assert coarse == pytest.approx(fine, rel=0.01)


def test_summary_of_zero_counts():
    rows = summarize_census({5.0: [0, 0, 0], 10.0: [0, 0, 0]}, 40, 0.3, PAR, L1, "lattice", samples=2_000)
    assert [r.empirical_mean for r in rows] == [0.0, 0.0]
    assert [r.N for r in rows] == [5.0, 10.0]
    assert empirical_n_min(rows) == 5.0
    assert set(rows[0].as_dict()) == {"N", "a", "empirical_mean", "empirical_stderr", "mc_theory", "mc_stderr",
                                      "paper_bound_case", "paper_bound_value"}


def test_empirical_n_min_stops_at_first_violation():
    rows = summarize_census({5.0: [10**6, 10**6], 10.0: [0, 0]}, 40, 0.3, PAR, L1, "lattice", samples=2_000)
    assert empirical_n_min(rows) == 10.0
