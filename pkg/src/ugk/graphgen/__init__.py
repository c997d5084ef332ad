"""Dynamic heterogeneous graph construction.

Edge sets are rebuilt each hour from sun, radiation and wind; two static
relations (feature-space k-NN and same-class contiguity) are computed once
per scene. A compiled kernel module accelerates the per-timestep builders
when available; a numpy fallback with identical semantics is selected at
import time otherwise (see ``builders.BACKEND``).
"""

from .config import GraphConfig, HeteroGraph, RelationKind
from .builders import (
    BACKEND,
    build_graph,
    build_graph_sequence,
    build_internal_edges,
    build_shadow_edges,
    build_similarity_edges,
    build_vegetation_edges,
    build_wind_edges,
    compute_edge_attributes,
    compute_edge_weights,
    read_graph_file,
    write_graph_file,
)
from .oracle import bruteforce_edges

__all__ = [
    "BACKEND",
    "GraphConfig",
    "HeteroGraph",
    "RelationKind",
    "bruteforce_edges",
    "build_graph",
    "build_graph_sequence",
    "build_internal_edges",
    "build_shadow_edges",
    "build_similarity_edges",
    "build_vegetation_edges",
    "build_wind_edges",
    "compute_edge_attributes",
    "compute_edge_weights",
    "read_graph_file",
    "write_graph_file",
]
