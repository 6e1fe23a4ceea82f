"""Cost distance, graph distance, cost balls and path deviation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _paths
from .geometry import point_segment_distance
from .graph import SpatialGraph

UNREACHABLE = math.inf


@dataclass(frozen=True)
class DistanceResult:
    source: int
    target: int
    distance: float
    path: tuple[int, ...]

    @property
    def reachable(self) -> bool:
        return not math.isinf(self.distance)

    @property
    def hops(self) -> int:
        return len(self.path) - 1 if self.path else -1


@dataclass(frozen=True)
class ShortestPathTree:
    source: int
    dist: np.ndarray
    pred: np.ndarray
    hops: np.ndarray

    def path_to(self, t: int) -> tuple[int, ...]:
        if math.isinf(self.dist[t]):
            return ()
        out = [int(t)]
        while out[-1] != self.source:
            out.append(int(self.pred[out[-1]]))
        return tuple(reversed(out))


def _mask_args(graph: SpatialGraph, vmask):
    if vmask is None:
        vmask = graph.active
    if vmask is None:
        return np.zeros(1, dtype=np.bool_), False
    return np.ascontiguousarray(vmask, dtype=np.bool_), True


def _check_vertex(graph: SpatialGraph, v: int) -> None:
    if not (0 <= v < graph.n_vertices):
        raise IndexError(f"vertex {v} is not in the graph")


def shortest_path_tree(graph: SpatialGraph, source: int, cutoff: float = math.inf,
                       target: int = -1, vmask=None) -> ShortestPathTree:
    _check_vertex(graph, source)
    indptr, nbr, eidx = graph.csr
    mask, use = _mask_args(graph, vmask)
    dist, pred, order = _paths.dijkstra(indptr, nbr, eidx, graph.costs, int(source), int(target),
                                        float(cutoff), mask, use)
    return ShortestPathTree(int(source), dist, pred, _paths.tree_hops(pred, order))


def cost_distance(graph: SpatialGraph, s: int, t: int, vmask=None) -> DistanceResult:
    """Minimal total cost over paths from s to t, with one optimal path."""
    _check_vertex(graph, t)
    tree = shortest_path_tree(graph, s, target=t, vmask=vmask)
    return DistanceResult(int(s), int(t), float(tree.dist[t]), tree.path_to(t))


def cost_ball(graph: SpatialGraph, s: int, r: float) -> np.ndarray:
    """Sorted ids of the vertices within cost distance r of s."""
    tree = shortest_path_tree(graph, s, cutoff=r)
    return np.flatnonzero(np.isfinite(tree.dist) & (tree.dist <= r))


def ball_growth_profile(graph: SpatialGraph, s: int, radii) -> np.ndarray:
    """|B_r(s)| for each radius, from a single truncated search."""
    radii = np.asarray(radii, dtype=np.float64)
    if radii.size == 0:
        return np.zeros(0, dtype=np.int64)
    tree = shortest_path_tree(graph, s, cutoff=float(radii.max()))
    d = np.sort(tree.dist[np.isfinite(tree.dist)])
    return np.searchsorted(d, radii, side="right").astype(np.int64)


def hop_distances(graph: SpatialGraph, s: int, vmask=None) -> np.ndarray:
    _check_vertex(graph, s)
    indptr, nbr, _ = graph.csr
    mask, use = _mask_args(graph, vmask)
    hops, _ = _paths.bfs(indptr, nbr, int(s), mask, use)
    return hops


def graph_distance(graph: SpatialGraph, s: int, t: int):
    """Hop count of a shortest path, or UNREACHABLE."""
    _check_vertex(graph, t)
    h = int(hop_distances(graph, s)[t])
    return UNREACHABLE if h < 0 else h


def path_cost(graph: SpatialGraph, path) -> float:
    """Sum of edge costs along a vertex sequence (summed with math.fsum)."""
    if len(path) < 2:
        return 0.0
    a = np.minimum(path[:-1], path[1:])
    b = np.maximum(path[:-1], path[1:])
    key = graph.edges_u * graph.n_vertices + graph.edges_v
    idx = np.searchsorted(key, np.asarray(a) * graph.n_vertices + np.asarray(b))
    if np.any(idx >= key.shape[0]) or np.any(key[np.minimum(idx, key.shape[0] - 1)] != a * graph.n_vertices + b):
        raise ValueError("path uses a missing edge")
    return math.fsum(graph.costs[idx])


def path_deviation(graph: SpatialGraph, path, u=None, v=None) -> float:
    """Max distance of path vertices from the segment between u and v (path endpoints by default)."""
    pts = graph.positions[np.asarray(path, dtype=np.int64)]
    if pts.shape[0] == 0:
        raise ValueError("path must be non-empty")
    a = pts[0] if u is None else np.asarray(u, dtype=np.float64)
    b = pts[-1] if v is None else np.asarray(v, dtype=np.float64)
    return float(point_segment_distance(pts, a, b).max())


def distance_rows(graph: SpatialGraph, pairs) -> list[dict]:
    """Rows with columns source, target, euclid, cost_distance, hops, deviation."""
    rows = []
    by_source: dict[int, list[int]] = {}
    for s, t in pairs:
        by_source.setdefault(int(s), []).append(int(t))
    cache = {s: shortest_path_tree(graph, s) for s in sorted(by_source)}
    for s, t in pairs:
        tree = cache[int(s)]
        path = tree.path_to(int(t))
        euclid = float(np.linalg.norm(graph.positions[s] - graph.positions[t]))
        rows.append({
            "source": int(s),
            "target": int(t),
            "euclid": euclid,
            "cost_distance": float(tree.dist[t]),
            "hops": int(tree.hops[t]) if path else -1,
            "deviation": path_deviation(graph, path) if path else math.nan,
        })
    return rows
