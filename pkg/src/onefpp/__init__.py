"""One-dependent first passage percolation on spatial random graphs."""

__version__ = "0.1.0"

from .generate import Mode, generate_graph, subgraph_GM
from .geometry import BlockGeometry, BoxingScheme, Domain, DomainKind
from .graph import RootConditioning, SpatialGraph, read_graph, write_graph
from .metric import cost_ball, cost_distance, graph_distance
from .params import ModelParams, Phase, PhaseReport, classify_phase, compute_thresholds, validate_params

__all__ = [
    "BlockGeometry",
    "BoxingScheme",
    "Domain",
    "DomainKind",
    "Mode",
    "ModelParams",
    "Phase",
    "PhaseReport",
    "RootConditioning",
    "SpatialGraph",
    "classify_phase",
    "compute_thresholds",
    "cost_ball",
    "cost_distance",
    "generate_graph",
    "graph_distance",
    "read_graph",
    "subgraph_GM",
    "validate_params",
    "write_graph",
]
