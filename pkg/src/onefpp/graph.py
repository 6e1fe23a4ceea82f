"""Spatial graph container and its text serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .distributions import LDistribution
from .geometry import Domain
from .params import ModelParams

FORMAT_TAG = "onefpp-graph v1"


class RootKind(str, Enum):
    NONE = "none"
    ORIGIN = "origin"
    TWO_ROOTS = "two_roots"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RootConditioning:
    kind: RootKind = RootKind.NONE
    x: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RootKind(self.kind))
        if self.kind == RootKind.TWO_ROOTS and self.x is None:
            raise ValueError("two-root conditioning needs the second point x")

    @classmethod
    def none(cls) -> "RootConditioning":
        return cls(RootKind.NONE)

    @classmethod
    def origin(cls) -> "RootConditioning":
        return cls(RootKind.ORIGIN)

    @classmethod
    def two_roots(cls, x) -> "RootConditioning":
        return cls(RootKind.TWO_ROOTS, tuple(float(c) for c in x))


class Vertex(NamedTuple):
    id: int
    position: tuple[float, ...]
    weight: float


class EdgeRecord(NamedTuple):
    u: int
    v: int
    l_value: float
    cost: float


def edge_costs(l_values: np.ndarray, wu: np.ndarray, wv: np.ndarray, mu: float) -> np.ndarray:
    """cost = L (W_u W_v)^mu, with the penalty taken through logs when it would overflow."""
    l_values = np.asarray(l_values, dtype=np.float64)
    if mu == 0.0:
        return l_values.copy()
    ww = np.asarray(wu, dtype=np.float64) * np.asarray(wv, dtype=np.float64)
    with np.errstate(over="ignore", divide="ignore"):
        direct = l_values * ww**mu
        big = ~np.isfinite(direct) | (np.log(ww) * mu > 690.0)
    if np.any(big):
        with np.errstate(divide="ignore", over="ignore"):
            lg = np.log(l_values[big]) + mu * (np.log(wu[big]) + np.log(wv[big]))
            direct[big] = np.exp(lg)
    return direct


@dataclass(frozen=True, eq=False)
class SpatialGraph:
    """Immutable undirected graph with positions, weights and edge costs.

    Edges are stored as arrays sorted by (u, v) with u < v.
    """

    domain: Domain
    params: ModelParams
    positions: np.ndarray
    weights: np.ndarray
    edges_u: np.ndarray
    edges_v: np.ndarray
    l_values: np.ndarray
    costs: np.ndarray
    seed: int = 0
    l_spec: LDistribution = field(default_factory=LDistribution)
    root_conditioning: RootConditioning = field(default_factory=RootConditioning)
    roots: tuple[int, ...] = ()
    active: np.ndarray | None = None

    @property
    def vertex_mask(self) -> np.ndarray:
        """Vertices belonging to the graph; all ids unless restricted by a subgraph."""
        if self.active is None:
            return np.ones(self.n_vertices, dtype=bool)
        return self.active

    @property
    def n_vertices(self) -> int:
        return int(self.positions.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.edges_u.shape[0])

    @property
    def d(self) -> int:
        return int(self.positions.shape[1])

    def vertex(self, i: int) -> Vertex:
        return Vertex(int(i), tuple(float(c) for c in self.positions[i]), float(self.weights[i]))

    def edge(self, e: int) -> EdgeRecord:
        return EdgeRecord(int(self.edges_u[e]), int(self.edges_v[e]), float(self.l_values[e]), float(self.costs[e]))

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbours, edge index); neighbour lists sorted by id."""
        n = self.n_vertices
        src = np.concatenate([self.edges_u, self.edges_v])
        dst = np.concatenate([self.edges_v, self.edges_u])
        eid = np.concatenate([np.arange(self.n_edges), np.arange(self.n_edges)])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)

    def neighbours(self, i: int) -> np.ndarray:
        indptr, nbr, _ = self.csr
        return nbr[indptr[i]:indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.edges_u, self.edges_v]), minlength=self.n_vertices)

    def with_mu(self, mu: float) -> "SpatialGraph":
        """Same vertices, edges and L values; costs recomputed at penalty mu."""
        costs = edge_costs(self.l_values, self.weights[self.edges_u], self.weights[self.edges_v], mu)
        g = replace(self, params=self.params.with_mu(mu), costs=costs)
        if "csr" in self.__dict__:
            g.__dict__["csr"] = self.__dict__["csr"]
        return g

    def edge_subgraph(self, vertex_mask: np.ndarray, edge_mask: np.ndarray) -> "SpatialGraph":
        """Keep the edges in edge_mask whose endpoints are both in vertex_mask.

        Vertex ids are preserved; vertices outside the mask stay as isolated ids.
        """
        keep = edge_mask & vertex_mask[self.edges_u] & vertex_mask[self.edges_v]
        return replace(
            self,
            active=vertex_mask & self.vertex_mask,
            edges_u=self.edges_u[keep],
            edges_v=self.edges_v[keep],
            l_values=self.l_values[keep],
            costs=self.costs[keep],
        )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _par_to_json(par: ModelParams) -> dict:
    out = {}
    for k, v in par.as_dict().items():
        out[k] = "inf" if isinstance(v, float) and math.isinf(v) else v
    return out


def _par_from_json(obj: dict) -> ModelParams:
    vals = {k: (math.inf if v == "inf" else v) for k, v in obj.items()}
    vals["d"] = int(vals["d"])
    return ModelParams(**vals)


def write_graph(graph: SpatialGraph, path) -> None:
    """Text format: a header line, then `V id x_1..x_d weight` and `E u v l_value cost` lines."""
    header = {
        "format": FORMAT_TAG,
        "seed": int(graph.seed),
        "par": _par_to_json(graph.params),
        "domain": {
            "d": graph.domain.d,
            "kind": str(graph.domain.kind),
            "half_side": _fmt(graph.domain.half_side),
            "torus_wrap": graph.domain.torus_wrap,
        },
        "l_spec": {
            "kind": str(graph.l_spec.kind),
            "beta": graph.l_spec.beta,
            "cap": graph.l_spec.cap,
            "value": graph.l_spec.value,
            "table": [list(p) for p in graph.l_spec.table],
        },
        "roots": {
            "kind": str(graph.root_conditioning.kind),
            "x": list(graph.root_conditioning.x) if graph.root_conditioning.x is not None else None,
            "ids": list(graph.roots),
        },
    }
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for i in range(graph.n_vertices):
            coords = " ".join(_fmt(c) for c in graph.positions[i])
            fh.write(f"V {i} {coords} {_fmt(graph.weights[i])}\n")
        for e in range(graph.n_edges):
            fh.write(
                f"E {int(graph.edges_u[e])} {int(graph.edges_v[e])} "
                f"{_fmt(graph.l_values[e])} {_fmt(graph.costs[e])}\n"
            )


def read_graph(path) -> SpatialGraph:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError("missing graph header")
        header = json.loads(first[2:])
        if header.get("format") != FORMAT_TAG:
            raise ValueError("unknown graph format")
        dom = header["domain"]
        domain = Domain(int(dom["d"]), dom["kind"], float(dom["half_side"]), bool(dom["torus_wrap"]))
        d = domain.d
        vids, pos, wts = [], [], []
        eu, ev, ls, cs = [], [], [], []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "V":
                vids.append(int(parts[1]))
                pos.append([float(x) for x in parts[2:2 + d]])
                wts.append(float(parts[2 + d]))
            elif parts[0] == "E":
                eu.append(int(parts[1]))
                ev.append(int(parts[2]))
                ls.append(float(parts[3]))
                cs.append(float(parts[4]))
            else:
                raise ValueError(f"unexpected line: {line.strip()}")
    if vids != list(range(len(vids))):
        raise ValueError("vertex ids must be 0..n-1 in order")
    ls_ = header["l_spec"]
    l_spec = LDistribution(ls_["kind"], beta=ls_["beta"], cap=ls_["cap"], value=ls_["value"],
                           table=tuple(tuple(p) for p in ls_["table"]))
    roots = header["roots"]
    rc = RootConditioning(roots["kind"], tuple(roots["x"]) if roots["x"] is not None else None)
    return SpatialGraph(
        domain=domain,
        params=_par_from_json(header["par"]),
        positions=np.array(pos, dtype=np.float64).reshape(-1, d),
        weights=np.array(wts, dtype=np.float64),
        edges_u=np.array(eu, dtype=np.int64),
        edges_v=np.array(ev, dtype=np.int64),
        l_values=np.array(ls, dtype=np.float64),
        costs=np.array(cs, dtype=np.float64),
        seed=int(header["seed"]),
        l_spec=l_spec,
        root_conditioning=rc,
        roots=tuple(int(i) for i in roots["ids"]),
    )
