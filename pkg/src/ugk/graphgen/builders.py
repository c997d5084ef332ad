"""Indexed edge builders, graph assembly and the graph cache format.

The three hourly relations (shadow, vegetation activity, convective
diffusion) run on a compiled kernel module when the extension built; the
numpy fallback in _reference.py is selected otherwise. Set UGK_BACKEND=numpy
to force the fallback. Both backends produce identical edge sets.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from scipy.special import cosdg, sindg, tandg

from ..errors import TooFewNodes
from ..scene import Category, GridScene, StaticFeatureMatrix, WeatherRecord
from ..solar import SunState, shadow_azimuth, sun_for_record
from .config import (
    DYNAMIC_RELATIONS,
    GraphConfig,
    HeteroGraph,
    RelationKind,
    STATIC_RELATIONS,
    sort_edges,
)

if os.environ.get("UGK_BACKEND", "").lower() == "numpy":
    from . import _reference as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _reference as _impl  # type: ignore[no-redef]

        BACKEND = "numpy"


# ---------------------------------------------------------------------------
# Static relations

def build_similarity_edges(x, k: int) -> np.ndarray:
    """Directed k-NN edges in the normalized static feature space.

    Distance ties are broken by the smaller node index (stable sort), so the
    edge set is deterministic across platforms.
    """
    values = x.values if isinstance(x, StaticFeatureMatrix) else np.asarray(x)
    n = len(values)
    if n <= k:
        raise TooFewNodes(f"need more than k={k} nodes, got {n}")
    srcs = np.empty(n * k, dtype=np.int64)
    dsts = np.empty(n * k, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n, chunk):
        block = values[start:start + chunk]
        d2 = ((block[:, None, :] - values[None, :, :]) ** 2).sum(axis=-1)
        for i in range(len(block)):
            d2[i, start + i] = np.inf
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        for i in range(len(block)):
            lo = (start + i) * k
            srcs[lo:lo + k] = start + i
            dsts[lo:lo + k] = nearest[i]
    return sort_edges(np.stack([srcs, dsts], axis=1))


def build_internal_edges(scene: GridScene) -> np.ndarray:
    """Moore-neighborhood edges emitted by 'internal' nodes: non-border
    cells whose four von-Neumann neighbors all share their class."""
    cat = scene.category
    rows, cols = cat.shape
    interior = np.zeros((rows, cols), dtype=bool)
    core = cat[1:-1, 1:-1]
    interior[1:-1, 1:-1] = (
        (cat[:-2, 1:-1] == core)
        & (cat[2:, 1:-1] == core)
        & (cat[1:-1, :-2] == core)
        & (cat[1:-1, 2:] == core)
    )
    node = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    srcs = node[interior]
    pairs = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            pairs.append(np.stack([srcs, srcs + dr * cols + dc], axis=1))
    if not pairs:
        return sort_edges(np.zeros((0, 2), dtype=np.int64))
    return sort_edges(np.concatenate(pairs, axis=0))


# ---------------------------------------------------------------------------
# Dynamic relations

def _shadow_reach(scene: GridScene, sun: SunState, cfg: GraphConfig) -> np.ndarray:
    """Per-cell shadow reach in grid units (0 for non-shading cells)."""
    tan_elev = float(tandg(sun.elevation_deg))
    reach = np.zeros((scene.rows, scene.cols), dtype=np.float64)
    if np.isinf(tan_elev):
        return reach
    is_b = scene.category == Category.BUILDING
    is_t = scene.category == Category.TREE
    reach[is_b] = np.minimum(
        scene.building_height_m[is_b] / (tan_elev * scene.cell_size_m),
        cfg.r_max_building_grids,
    )
    reach[is_t] = np.minimum(
        scene.canopy_height_m[is_t] / (tan_elev * scene.cell_size_m),
        cfg.r_max_tree_grids,
    )
    return reach


def build_shadow_edges(scene: GridScene, sun: SunState, cfg: GraphConfig) -> np.ndarray:
    if not sun.is_up:
        return np.zeros((0, 2), dtype=np.int64)
    phi = shadow_azimuth(sun)
    reach = _shadow_reach(scene, sun, cfg)
    edges = _impl.shadow_edges(
        scene.category,
        reach,
        float(cosdg(phi)),
        float(sindg(phi)),
        float(cosdg(cfg.shadow_width_deg / 2.0)),
        int(Category.BUILDING),
    )
    return sort_edges(edges)


def vegetation_radius(ghi_wh_m2: float, cfg: GraphConfig) -> float:
    return cfg.r_base_vegetation_grids * min(max(ghi_wh_m2 / 1000.0, 0.5), 1.2)


def build_vegetation_edges(scene: GridScene, weather: WeatherRecord,
                           cfg: GraphConfig) -> np.ndarray:
    radius = vegetation_radius(weather.ghi_wh_m2, cfg)
    edges = _impl.vegetation_edges(scene.category, radius, int(Category.TREE))
    return sort_edges(edges)


def build_wind_edges(scene: GridScene, weather: WeatherRecord,
                     cfg: GraphConfig) -> np.ndarray:
    downwind = (weather.wind_dir_deg + 180.0) % 360.0
    v = min(max(weather.wind_speed_ms, 0.0), cfg.v_max_ms)
    edges = _impl.wind_edges(
        scene.category,
        cfg.r_local_grids,
        float(cosdg(downwind)),
        float(sindg(downwind)),
        cfg.lambda_wind,
        v / cfg.v_max_ms,
        int(Category.BUILDING),
    )
    return sort_edges(edges)


# ---------------------------------------------------------------------------
# Assembly

def build_static_edges(scene: GridScene, x, cfg: GraphConfig) -> dict:
    return {
        RelationKind.SEMANTIC_SIMILARITY: build_similarity_edges(x, cfg.k_similarity),
        RelationKind.INTERNAL_CONTIGUITY: build_internal_edges(scene),
    }


def build_graph(scene: GridScene, x, weather_t: WeatherRecord, sun_t: SunState,
                cfg: GraphConfig, static_edges: dict | None = None) -> HeteroGraph:
    if static_edges is None:
        static_edges = build_static_edges(scene, x, cfg)
    edges = {
        RelationKind.SHADOW: build_shadow_edges(scene, sun_t, cfg),
        RelationKind.VEGETATION_ACTIVITY: build_vegetation_edges(scene, weather_t, cfg),
        RelationKind.CONVECTIVE_DIFFUSION: build_wind_edges(scene, weather_t, cfg),
    }
    edges.update(static_edges)
    graph = HeteroGraph(num_nodes=scene.num_nodes, edges=edges,
                        hour_index=weather_t.hour_index)
    if cfg.weights_enabled:
        graph.weights = compute_edge_weights(graph, scene, weather_t, cfg)
    if cfg.attributes_enabled:
        graph.attrs = compute_edge_attributes(graph, scene, weather_t, cfg)
    return graph


def build_graph_sequence(scene: GridScene, x, weather: list, cfg: GraphConfig) -> list:
    """One graph per weather record; the two static relations are computed
    once and shared object-for-object across all timesteps."""
    if not weather:
        raise ValueError("weather sequence is empty")
    static_edges = build_static_edges(scene, x, cfg)
    return [
        build_graph(scene, x, w, sun_for_record(w, scene), cfg, static_edges)
        for w in weather
    ]


# ---------------------------------------------------------------------------
# Optional weights and attributes

def _edge_grid_distance(edges: np.ndarray, cols: int) -> np.ndarray:
    dr = edges[:, 1] // cols - edges[:, 0] // cols
    dc = edges[:, 1] % cols - edges[:, 0] % cols
    return np.sqrt((dr * dr + dc * dc).astype(np.float64))


def compute_edge_weights(graph: HeteroGraph, scene: GridScene,
                         weather_t: WeatherRecord, cfg: GraphConfig) -> dict:
    """Distance-decayed weights, boosted for active shadow edges and for
    vegetation edges from tall source trees."""
    canopy = scene.canopy_height_m.reshape(-1)
    h_tree_max = float(canopy.max())
    out = {}
    for rel, edges in graph.edges.items():
        if len(edges) == 0:
            out[rel] = np.zeros(0, dtype=np.float64)
            continue
        lam = cfg.lambda_sim if rel == RelationKind.SEMANTIC_SIMILARITY else cfg.lambda_phys
        d_grids = _edge_grid_distance(edges, scene.cols)
        w = cfg.w_base / (1.0 + lam * d_grids)
        if rel == RelationKind.SHADOW:
            w = w * cfg.beta_shadow
        elif rel == RelationKind.VEGETATION_ACTIVITY and h_tree_max > 0:
            gamma = 1.0 + cfg.gamma_tree * (canopy[edges[:, 0]] / h_tree_max)
            w = w * gamma
        out[rel] = w
    return out


def compute_edge_attributes(graph: HeteroGraph, scene: GridScene,
                            weather_t: WeatherRecord, cfg: GraphConfig) -> dict:
    """5-vector per edge: [distance, dx east, dy south, cos(wind dev), relation id]."""
    downwind = (weather_t.wind_dir_deg + 180.0) % 360.0
    wn, we = float(cosdg(downwind)), float(sindg(downwind))
    out = {}
    for rel, edges in graph.edges.items():
        a = np.zeros((len(edges), 5), dtype=np.float64)
        if len(edges):
            dr = (edges[:, 1] // scene.cols - edges[:, 0] // scene.cols).astype(np.float64)
            dc = (edges[:, 1] % scene.cols - edges[:, 0] % scene.cols).astype(np.float64)
            d = np.sqrt(dr * dr + dc * dc)
            a[:, 0] = d
            a[:, 1] = dc
            a[:, 2] = dr
            a[:, 3] = (-dr * wn + dc * we) / d
            a[:, 4] = float(rel)
        out[rel] = a
    return out


# ---------------------------------------------------------------------------
# Graph cache files

def write_graph_file(graph: HeteroGraph, path: str | Path, config_digest: str):
    """One cache file per timestep: a header line, then one sorted CSV line
    per edge: relation_id,src,dst[,weight[,a1..a5]]."""
    lines = [f"# num_nodes={graph.num_nodes} hour_index={graph.hour_index} "
             f"config={config_digest}\n"]
    for rel in sorted(graph.edges, key=int):
        edges = graph.edges[rel]
        w = graph.weights.get(rel) if graph.weights is not None else None
        a = graph.attrs.get(rel) if graph.attrs is not None else None
        for i, (s, d) in enumerate(edges):
            row = f"{int(rel)},{s},{d}"
            if w is not None:
                row += f",{float(w[i])!r}"
            if a is not None:
                row += "," + ",".join(repr(float(v)) for v in a[i])
            lines.append(row + "\n")
    Path(path).write_text("".join(lines))


def read_graph_file(path: str | Path) -> tuple[HeteroGraph, str]:
    lines = Path(path).read_text().splitlines()
    header = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
    edges: dict[RelationKind, list] = {}
    weights: dict[RelationKind, list] = {}
    attrs: dict[RelationKind, list] = {}
    for line in lines[1:]:
        toks = line.split(",")
        rel = RelationKind(int(toks[0]))
        edges.setdefault(rel, []).append((int(toks[1]), int(toks[2])))
        if len(toks) >= 4:
            weights.setdefault(rel, []).append(float(toks[3]))
        if len(toks) == 9:
            attrs.setdefault(rel, []).append([float(t) for t in toks[4:]])
    graph = HeteroGraph(
        num_nodes=int(header["num_nodes"]),
        edges={r: np.asarray(e, dtype=np.int64).reshape(-1, 2)
               for r, e in edges.items()},
        weights={r: np.asarray(w) for r, w in weights.items()} or None,
        attrs={r: np.asarray(a) for r, a in attrs.items()} or None,
        hour_index=int(header["hour_index"]),
    )
    return graph, header["config"]
