import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onefpp import Domain, ModelParams, cost_ball, cost_distance, generate_graph, graph_distance
from onefpp.distributions import LDistribution
from onefpp.metric import (
    UNREACHABLE,
    ball_growth_profile,
    distance_rows,
    path_cost,
    path_deviation,
    shortest_path_tree,
)
from onefpp.params import INFINITE
from conftest import hand_graph
from oracles import exact_dijkstra, rounding_slack, scipy_distances, scipy_hops, triangle_holds

PAR = ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.8, beta=1.0)


def _line(make_graph):
    return make_graph([[0], [1], [2]], [(0, 1), (1, 2), (0, 2)], [1.0, 2.0, 4.0])


def test_self_distance(make_graph):
    g = _line(make_graph)
    r = cost_distance(g, 1, 1)
    assert r.distance == 0.0 and r.path == (1,)


def test_two_hops_beat_direct(make_graph):
    r = cost_distance(_line(make_graph), 0, 2)
    assert r.distance == 3.0 and r.path == (0, 1, 2)


def test_unreachable(make_graph):
    g = make_graph([[0], [1], [5]], [(0, 1)], [1.0])
    r = cost_distance(g, 0, 2)
    assert r.distance == UNREACHABLE and r.path == () and not r.reachable
    assert graph_distance(g, 0, 2) == UNREACHABLE


def test_unknown_vertex(make_graph):
    g = _line(make_graph)
    with pytest.raises(IndexError):
        cost_distance(g, 0, 7)
    with pytest.raises(IndexError):
        graph_distance(g, -1, 0)


def test_ties_go_to_smaller_id(make_graph):
    g = make_graph([[0, 0], [1, 0], [0, 1], [1, 1]], [(0, 2), (2, 3), (0, 1), (1, 3)], [1.0, 1.0, 1.0, 1.0])
    assert cost_distance(g, 0, 3).path == (0, 1, 3)
    assert cost_distance(g, 3, 0).path == (3, 1, 0)


def test_cost_ball_examples(make_graph):
    g = make_graph([[0], [1], [2], [9]], [(0, 1), (1, 2)], [0.5, 0.7])
    assert cost_ball(g, 0, 0.0).tolist() == [0]
    assert cost_ball(g, 0, math.inf).tolist() == [0, 1, 2]
    assert cost_ball(g, 0, np.nextafter(0.5, 0)).tolist() == [0]
    assert cost_ball(g, 0, 1.2).tolist() == [0, 1, 2]


def test_graph_distance_examples(make_graph):
    g = _line(make_graph)
    assert graph_distance(g, 0, 1) == 1
    assert graph_distance(g, 2, 2) == 0


def test_ball_growth_examples(make_graph):
    g = make_graph([[i] for i in range(5)], [(i, i + 1) for i in range(4)])
    assert ball_growth_profile(g, 0, [0.0]).tolist() == [1]
    assert ball_growth_profile(g, 0, [0.0, 1.0, 2.0]).tolist() == [1, 2, 3]


def test_ball_growth_monotone_and_consistent():
    g = generate_graph(Domain(2, "lattice", 30), PAR, seed=3)
    radii = np.geomspace(0.5, 200, 12)
    sizes = ball_growth_profile(g, 0, radii)
    assert np.all(np.diff(sizes) >= 0)
    for r, s in zip(radii, sizes):
        assert cost_ball(g, 0, r).size == s


def test_matches_exact_rational_dijkstra():
    g = generate_graph(Domain(2, "continuum", 6), PAR, seed=11)
    for s in (0, 5, 17):
        exact = exact_dijkstra(g.n_vertices, g.edges_u, g.edges_v, g.costs, s)
        tree = shortest_path_tree(g, s)
        for v in range(g.n_vertices):
            if exact[v] is None:
                assert math.isinf(tree.dist[v])
            else:
                # the exact optimum rounded once; this instance has no near-tie sums
                assert tree.dist[v] == float(exact[v])


def test_matches_scipy():
    g = generate_graph(Domain(2, "lattice", 40), PAR, seed=12)
    srcs = [0, 100, 3000]
    ref = scipy_distances(g, srcs)
    for i, s in enumerate(srcs):
        ours = shortest_path_tree(g, s).dist
        fin = np.isfinite(ref[i])
        assert np.array_equal(fin, np.isfinite(ours))
        assert np.allclose(ours[fin], ref[i][fin], rtol=1e-12, atol=0)


def test_paths_realise_distances():
    g = generate_graph(Domain(2, "lattice", 25), PAR, seed=13)
    rng = np.random.default_rng(0)
    for _ in range(30):
        s, t = rng.integers(0, g.n_vertices, 2)
        r = cost_distance(g, int(s), int(t))
        if r.reachable:
            assert r.path[0] == s and r.path[-1] == t
            assert math.isclose(path_cost(g, r.path), r.distance, rel_tol=1e-9)


def test_path_cost_rejects_missing_edges(make_graph):
    with pytest.raises(ValueError):
        path_cost(_line(make_graph), [0, 1, 0, 3])


def assert_triangle(g, a, b, c, trees):
    ta, tb = trees[a], trees[b]
    assert triangle_holds(ta.dist[b], tb.dist[c], ta.dist[c], ta.hops[b], tb.hops[c], ta.hops[c])


def test_symmetry_and_triangle():
    g = generate_graph(Domain(2, "lattice", 30), PAR, seed=14)
    rng = np.random.default_rng(1)
    trees = {}
    for _ in range(100):
        a, b, c = (int(x) for x in rng.integers(0, g.n_vertices, 3))
        for v in (a, b, c):
            if v not in trees:
                trees[v] = shortest_path_tree(g, v)
        assert trees[a].dist[b] == trees[b].dist[a]
        assert trees[a].dist[b] >= 0
        assert_triangle(g, a, b, c, trees)


def test_unit_costs_match_bfs():
    par = ModelParams(d=2, tau=2.5, alpha=3.5, mu=0.0, beta=INFINITE)
    g = generate_graph(Domain(2, "lattice", 30), par, LDistribution.constant(1.0), seed=15)
    rng = np.random.default_rng(2)
    for _ in range(100):
        s, t = (int(x) for x in rng.integers(0, g.n_vertices, 2))
        dc = cost_distance(g, s, t).distance
        dg = graph_distance(g, s, t)
        assert dc == dg
    ref = scipy_hops(g, 0)
    ours = shortest_path_tree(g, 0).dist
    assert np.array_equal(ref, ours)


def test_distance_monotone_in_mu():
    g = generate_graph(Domain(2, "lattice", 25), PAR, seed=16)
    rng = np.random.default_rng(3)
    pairs = rng.integers(0, g.n_vertices, (40, 2))
    prev = None
    for mu in (0.0, 0.4, 0.8, 1.6):
        gm = g.with_mu(mu)
        d = np.array([cost_distance(gm, int(s), int(t)).distance for s, t in pairs])
        if prev is not None:
            assert np.all(d >= prev)
        prev = d


def test_vertex_mask_restricts_paths(make_graph):
    g = _line(make_graph)
    mask = np.array([True, False, True])
    assert cost_distance(g, 0, 2, vmask=mask).distance == 4.0


def test_distance_rows(make_graph):
    g = make_graph([[0, 0], [1, 1], [2, 0]], [(0, 1), (1, 2)], [1.0, 1.0])
    (row,) = distance_rows(g, [(0, 2)])
    assert row == {"source": 0, "target": 2, "euclid": 2.0, "cost_distance": 2.0, "hops": 2,
                   "deviation": pytest.approx(1.0)}
    assert path_deviation(g, [0, 1, 2]) == pytest.approx(1.0)


@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=8))
def test_path_graph_distance_is_sum(costs):
    n = len(costs) + 1
    g = hand_graph([[i] for i in range(n)], [(i, i + 1) for i in range(n - 1)], costs)
    exact = sum(Fraction(c) for c in costs)
    for s, t in ((0, n - 1), (n - 1, 0)):
        got = cost_distance(g, s, t).distance
        assert abs(Fraction(got) - exact) <= rounding_slack(got, n - 1)


def test_masked_subgraph_active_vertices():
    g = generate_graph(Domain(2, "lattice", 10), PAR, seed=17)
    keep = np.zeros(g.n_vertices, dtype=bool)
    keep[:50] = True
    sub = g.edge_subgraph(keep, np.ones(g.n_edges, dtype=bool))
    t = shortest_path_tree(sub, 0)
    assert np.all(np.isinf(t.dist[50:]))
    assert replace(sub, active=None).n_vertices == g.n_vertices
