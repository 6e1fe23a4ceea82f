import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from onefpp.geometry import (
    Block,
    BlockGeometry,
    BoxingScheme,
    Domain,
    block_of,
    box_of,
    children,
    deviation,
    lattice_index,
    lattice_points,
    sample_ppp,
)


def test_ppp_zero_intensity():
    assert sample_ppp(Domain(2, "continuum", 10.0), 0.0, 1).shape == (0, 2)


def test_ppp_deterministic():
    dom = Domain(2, "continuum", 5.0)
    assert np.array_equal(sample_ppp(dom, 1.0, 7), sample_ppp(dom, 1.0, 7))


def test_ppp_points_in_box():
    dom = Domain(3, "continuum", 4.0)
    pts = sample_ppp(dom, 2.0, 3)
    assert np.all(np.abs(pts) <= 4.0)


def test_ppp_needs_continuum():
    with pytest.raises(ValueError):
        sample_ppp(Domain(2, "lattice", 5.0), 1.0, 0)


def test_ppp_count_moments():
    dom = Domain(2, "continuum", 50.0)
    counts = np.array([sample_ppp(dom, 1.0, s).shape[0] for s in range(1000)])
    # mean 1e4, std 100; the sample mean has std 100 / sqrt(1000)
    assert abs(counts.mean() - 1e4) < 3 * 100 / math.sqrt(1000)
    assert 90 < counts.std(ddof=1) < 110


def test_ppp_thinning_matches_lower_intensity():
    dom = Domain(2, "continuum", 10.0)
    q = 0.3
    thinned = []
    for s in range(1000):
        pts = sample_ppp(dom, 1.0, s)
        keep = np.random.default_rng(10_000 + s).random(pts.shape[0]) < q
        thinned.append(int(keep.sum()))
    direct = [sample_ppp(dom, q, 20_000 + s).shape[0] for s in range(1000)]
    assert stats.ks_2samp(thinned, direct).pvalue > 0.01


def test_ppp_positions_uniform():
    pts = sample_ppp(Domain(1, "continuum", 500.0), 1.0, 3)[:, 0]
    assert stats.kstest(pts, "uniform", args=(-500, 1000)).pvalue > 0.01


@pytest.mark.parametrize("d,half,n", [(1, 1, 3), (2, 1, 9), (2, 100, 40401)])
def test_lattice_counts(d, half, n):
    assert lattice_points(Domain(d, "lattice", half)).shape == (n, d)


def test_lattice_1d_points():
    assert lattice_points(Domain(1, "lattice", 1))[:, 0].tolist() == [-1, 0, 1]


def test_lattice_index_matches_order():
    dom = Domain(2, "lattice", 3)
    pts = lattice_points(dom)
    for i in (0, 5, 24, 48):
        assert lattice_index(dom, pts[i]) == i
    with pytest.raises(ValueError):
        lattice_index(dom, (0.5, 0))


@pytest.mark.parametrize("point,z", [((0, 0), (0, 0)), ((2, 0), (1, 0)), ((-0.5, 3.9), (-1, 1))])
def test_box_of_examples(point, z):
    assert box_of(point, BoxingScheme(2.0)) == z


@given(st.floats(0.1, 10.0), st.lists(st.integers(-50, 50), min_size=1, max_size=3))
def test_box_representative_round_trip(R, z):
    scheme = BoxingScheme(R)
    pt = R * np.asarray(z, dtype=np.float64)
    assert box_of(pt, scheme) == tuple(z)


@given(st.floats(0.1, 10.0), st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=3))
def test_box_contains_point(R, pt):
    scheme = BoxingScheme(R)
    z = scheme.box_of(pt)
    lo, hi = scheme.box_bounds(z)
    p = np.asarray(pt)
    assert np.all(lo <= p) and np.all(p < hi)


def test_boxing_offset_validation():
    with pytest.raises(ValueError):
        BoxingScheme(1.0, (0.5,))
    assert box_of((0.0,), BoxingScheme(1.0, (-0.5,))) == (0,)


def test_block_base_case():
    geom = BlockGeometry(8.0, "factorial", k0=2)
    idx, blk, kids = block_of((0.0, 0.0), geom, 2)
    assert idx == (0, 0)
    assert blk.side == 8.0 * 4
    assert blk.lower == (-16.0, -16.0)
    assert kids == []


def test_factorial_child_count():
    geom = BlockGeometry(1.0, "factorial", k0=1)
    for k in (2, 3, 4):
        for d in (1, 2):
            assert geom.child_count(k, d) == k ** (2 * d)
            assert geom.side(k) / geom.side(k - 1) == k * k
        _, _, kids = block_of((0.0, 0.0), geom, k)
        assert len(kids) == k**4


def test_geometric_child_count():
    geom = BlockGeometry(8.0, "geometric", gamma=4)
    assert geom.child_count(3, 2) == 16
    _, _, kids = block_of((0.0, 0.0), geom, 3)
    assert len(kids) == 16


def test_below_base_level_is_rejected():
    with pytest.raises(ValueError):
        block_of((0.0,), BlockGeometry(1.0, "factorial", k0=3), 2)


def test_default_factorial_base_level():
    assert BlockGeometry(1.0, "factorial").base_level(2) == 16 * 900


def test_sides_increase():
    for geom in (BlockGeometry(2.0, "factorial", k0=1), BlockGeometry(2.0, "geometric", gamma=3)):
        sides = [geom.side(k) for k in range(1, 12)]
        assert all(b > a for a, b in zip(sides, sides[1:]))


def test_block_nesting_random_points():
    rng = np.random.default_rng(5)
    geom = BlockGeometry(3.0, "geometric", gamma=3)
    for _ in range(1000):
        k = int(rng.integers(1, 5))
        j = tuple(int(c) for c in rng.integers(-1, 2, size=2))
        pt = rng.uniform(-200, 200, size=2)
        _, blk, kids = block_of(pt, geom, k, j)
        assert blk.contains(pt)[0]
        hits = [c for c in kids if c.contains(pt)[0]]
        assert len(hits) == 1
        c = hits[0]
        assert all(a >= b - 1e-9 for a, b in zip(c.lower, blk.lower))
        assert all(a <= b + 1e-9 for a, b in zip(c.upper, blk.upper))


def test_translated_block_shift():
    geom = BlockGeometry(4.0, "geometric", gamma=2)
    _, b0, _ = block_of((0.0,), geom, 2, (0,))
    _, b1, _ = block_of((0.1,), geom, 2, (1,))
    assert b1.lower[0] - b0.lower[0] == pytest.approx(geom.side(1) / 2)


def test_children_tile_the_block():
    blk = Block(2, (0.0, 0.0), 16.0)
    kids = children(blk, BlockGeometry(4.0, "geometric", gamma=4))
    assert sum(k.side**2 for k in kids) == pytest.approx(256.0)


def test_deviation_examples():
    assert deviation([(0, 0), (1, 0), (2, 0)], (0, 0), (2, 0)) == 0.0
    assert deviation([(0, 0), (1, 1), (2, 0)], (0, 0), (2, 0)) == pytest.approx(1.0)
    assert deviation([(3, 4)], (0, 0), (0, 0)) == pytest.approx(5.0)
    assert deviation([(0, 0), (1, 1), (2, 0)]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        deviation(np.zeros((0, 2)))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=10),
       st.tuples(st.floats(-10, 10), st.floats(-10, 10)), st.tuples(st.floats(-10, 10), st.floats(-10, 10)))
def test_deviation_zero_on_segment(ts, u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    path = [u + t * (v - u) for t in ts]
    assert deviation(path, u, v) <= 1e-12 * max(1.0, float(np.abs(u).max()), float(np.abs(v).max()))


@given(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), st.floats(0.01, 5))
def test_deviation_positive_off_segment(p, off):
    u = np.array([0.0, 0.0])
    v = np.array([10.0, 0.0])
    q = np.array([p[0], off])
    assert deviation([u, q, v], u, v) > 1e-12


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain(0, "lattice", 1.0)
    with pytest.raises(ValueError):
        Domain(2, "lattice", 0.0)
    assert Domain(2, "continuum", 2.0).volume == 16.0
