"""Relation kinds, construction parameters and the typed-edge container."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from enum import IntEnum

import numpy as np


class RelationKind(IntEnum):
    """The five edge types. Integer ids are stable for serialization."""

    SHADOW = 0
    VEGETATION_ACTIVITY = 1
    CONVECTIVE_DIFFUSION = 2
    SEMANTIC_SIMILARITY = 3
    INTERNAL_CONTIGUITY = 4

    @classmethod
    def from_name(cls, name: str) -> "RelationKind":
        key = name.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "shadow": cls.SHADOW,
            "vegetationactivity": cls.VEGETATION_ACTIVITY,
            "vegetation": cls.VEGETATION_ACTIVITY,
            "convectivediffusion": cls.CONVECTIVE_DIFFUSION,
            "wind": cls.CONVECTIVE_DIFFUSION,
            "semanticsimilarity": cls.SEMANTIC_SIMILARITY,
            "similarity": cls.SEMANTIC_SIMILARITY,
            "internalcontiguity": cls.INTERNAL_CONTIGUITY,
            "internal": cls.INTERNAL_CONTIGUITY,
        }
        if key not in aliases:
            raise ValueError(f"unknown relation name: {name}")
        return aliases[key]


DYNAMIC_RELATIONS = (
    RelationKind.SHADOW,
    RelationKind.VEGETATION_ACTIVITY,
    RelationKind.CONVECTIVE_DIFFUSION,
)
STATIC_RELATIONS = (
    RelationKind.SEMANTIC_SIMILARITY,
    RelationKind.INTERNAL_CONTIGUITY,
)


@dataclass
class GraphConfig:
    k_similarity: int = 8
    eps: float = 1e-6
    r_max_building_grids: float = 15.0
    r_max_tree_grids: float = 5.0
    shadow_width_deg: float = 25.0  # full width; deviation up to half each side
    r_base_vegetation_grids: float = 5.0
    lambda_wind: float = 0.3
    v_max_ms: float = 8.0
    r_local_grids: float = 3.0
    weights_enabled: bool = False
    attributes_enabled: bool = False
    # edge-weight rule constants
    w_base: float = 1.0
    lambda_sim: float = 0.005
    lambda_phys: float = 0.01
    beta_shadow: float = 1.2
    gamma_tree: float = 0.2

    def __post_init__(self):
        if min(self.r_max_building_grids, self.r_max_tree_grids,
               self.r_base_vegetation_grids, self.r_local_grids) <= 0:
            raise ValueError("all radii must be positive")
        if not 0 < self.shadow_width_deg <= 90:
            raise ValueError("shadow_width_deg must be in (0, 90]")
        if self.lambda_wind >= 1.0:
            raise ValueError("lambda_wind must keep the wind factor positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _empty_edges() -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


@dataclass
class HeteroGraph:
    """One timestep's typed edge sets over a fixed node set.

    Edge arrays are (E, 2) int64 of (src, dst) pairs, sorted by (src, dst).
    Weights and 5-dim attributes are optional per-relation arrays aligned
    with the edge lists.
    """

    num_nodes: int
    edges: dict = field(default_factory=dict)  # RelationKind -> (E, 2)
    weights: dict | None = None  # RelationKind -> (E,)
    attrs: dict | None = None  # RelationKind -> (E, 5)
    hour_index: int = 0

    def edge_array(self, rel: RelationKind) -> np.ndarray:
        return self.edges.get(rel, _empty_edges())

    def num_edges(self, rel: RelationKind | None = None) -> int:
        if rel is not None:
            return len(self.edge_array(rel))
        return sum(len(e) for e in self.edges.values())

    def validate(self):
        for rel, e in self.edges.items():
            if len(e) == 0:
                continue
            if e.min() < 0 or e.max() >= self.num_nodes:
                raise ValueError(f"{rel.name}: node index out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError(f"{rel.name}: self-loop")
            order = np.lexsort((e[:, 1], e[:, 0]))
            if not (order == np.arange(len(e))).all():
                raise ValueError(f"{rel.name}: edges not sorted")
            if len(np.unique(e, axis=0)) != len(e):
                raise ValueError(f"{rel.name}: duplicate edge")

    def masked(self, keep) -> "HeteroGraph":
        """Graph restricted to a subset of relations (others become empty)."""
        keep = set(keep)
        return HeteroGraph(
            num_nodes=self.num_nodes,
            edges={r: e for r, e in self.edges.items() if r in keep},
            weights=None if self.weights is None
            else {r: w for r, w in self.weights.items() if r in keep},
            attrs=None if self.attrs is None
            else {r: a for r, a in self.attrs.items() if r in keep},
            hour_index=self.hour_index,
        )

    def merged(self) -> "HeteroGraph":
        """All relations collapsed into one, duplicate pairs removed."""
        arrays = [e for e in self.edges.values() if len(e)]
        if arrays:
            stacked = np.unique(np.concatenate(arrays, axis=0), axis=0)
        else:
            stacked = _empty_edges()
        return HeteroGraph(
            num_nodes=self.num_nodes,
            edges={RelationKind.SHADOW: stacked},
            hour_index=self.hour_index,
        )


def sort_edges(edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        return _empty_edges()
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order]
