"""Brute-force edge construction over all node pairs.

Literal transcription of each edge rule on dense |V| x |V| matrices with no
spatial indexing or windowing. Exact set equality with the indexed builders
is the contract; the builders' tests lean on this module.
"""

from __future__ import annotations

import numpy as np
from scipy.special import cosdg, sindg, tandg

from ..scene import Category, GridScene, StaticFeatureMatrix, WeatherRecord
from ..solar import SunState
from .config import GraphConfig, RelationKind, sort_edges


def _pair_geometry(scene: GridScene):
    """Distance and north/east displacement matrices over all node pairs."""
    rows, cols = scene.rows, scene.cols
    r = (np.arange(rows * cols) // cols).astype(np.float64)
    c = (np.arange(rows * cols) % cols).astype(np.float64)
    dr = r[None, :] - r[:, None]  # row delta src -> dst
    dc = c[None, :] - c[:, None]
    d = np.sqrt(dr * dr + dc * dc)
    return d, -dr, dc  # north component is -row delta


def _mask_to_edges(mask: np.ndarray) -> np.ndarray:
    src, dst = np.nonzero(mask)
    return sort_edges(np.stack([src, dst], axis=1).astype(np.int64))


def _shadow(scene: GridScene, sun: SunState, cfg: GraphConfig) -> np.ndarray:
    if not sun.is_up:
        return np.zeros((0, 2), dtype=np.int64)
    cat = scene.category.reshape(-1)
    tan_elev = float(tandg(sun.elevation_deg))
    reach = np.zeros(scene.num_nodes)
    if not np.isinf(tan_elev):
        is_b = cat == Category.BUILDING
        is_t = cat == Category.TREE
        bh = scene.building_height_m.reshape(-1)
        th = scene.canopy_height_m.reshape(-1)
        reach[is_b] = np.minimum(
            bh[is_b] / (tan_elev * scene.cell_size_m), cfg.r_max_building_grids)
        reach[is_t] = np.minimum(
            th[is_t] / (tan_elev * scene.cell_size_m), cfg.r_max_tree_grids)
    phi = (sun.azimuth_deg + 180.0) % 360.0
    un, ue = float(cosdg(phi)), float(sindg(phi))
    cth = float(cosdg(cfg.shadow_width_deg / 2.0))
    d, dn, de = _pair_geometry(scene)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosdev = (dn * un + de * ue) / d
        mask = (
            (d > 0)
            & (d <= reach[:, None])
            & (cosdev >= cth)
            & (cat[None, :] != Category.BUILDING)
        )
    return _mask_to_edges(mask)


def _vegetation(scene: GridScene, weather: WeatherRecord, cfg: GraphConfig) -> np.ndarray:
    cat = scene.category.reshape(-1)
    radius = cfg.r_base_vegetation_grids * min(max(weather.ghi_wh_m2 / 1000.0, 0.5), 1.2)
    d, _, _ = _pair_geometry(scene)
    mask = (cat[:, None] == Category.TREE) & (d > 0) & (d <= radius)
    return _mask_to_edges(mask)


def _wind(scene: GridScene, weather: WeatherRecord, cfg: GraphConfig) -> np.ndarray:
    cat = scene.category.reshape(-1)
    downwind = (weather.wind_dir_deg + 180.0) % 360.0
    wn, we = float(cosdg(downwind)), float(sindg(downwind))
    v = min(max(weather.wind_speed_ms, 0.0), cfg.v_max_ms)
    vratio = v / cfg.v_max_ms
    d, dn, de = _pair_geometry(scene)
    open_pair = (cat[:, None] != Category.BUILDING) & (cat[None, :] != Category.BUILDING)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosdev = (dn * wn + de * we) / d
        alpha = 1.0 + cfg.lambda_wind * cosdev * vratio
        mask = open_pair & (d > 0) & (d / alpha <= cfg.r_local_grids)
    return _mask_to_edges(mask)


def _similarity(x, k: int) -> np.ndarray:
    values = x.values if isinstance(x, StaticFeatureMatrix) else np.asarray(x)
    n = len(values)
    pairs = []
    for i in range(n):
        d2 = ((values - values[i]) ** 2).sum(axis=1)
        order = np.lexsort((np.arange(n), d2))
        picked = [j for j in order if j != i][:k]
        pairs.extend((i, j) for j in picked)
    return sort_edges(np.asarray(pairs, dtype=np.int64))


def _internal(scene: GridScene) -> np.ndarray:
    rows, cols = scene.rows, scene.cols
    cat = scene.category
    pairs = []
    for r in range(rows):
        for c in range(cols):
            if r == 0 or c == 0 or r == rows - 1 or c == cols - 1:
                continue
            cls = cat[r, c]
            if not (cat[r - 1, c] == cls and cat[r + 1, c] == cls
                    and cat[r, c - 1] == cls and cat[r, c + 1] == cls):
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr or dc:
                        pairs.append((r * cols + c, (r + dr) * cols + c + dc))
    return sort_edges(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))


def bruteforce_edges(scene: GridScene, x, weather_t: WeatherRecord | None,
                     sun_t: SunState | None, cfg: GraphConfig,
                     relation: RelationKind) -> np.ndarray:
    if relation == RelationKind.SHADOW:
        return _shadow(scene, sun_t, cfg)
    if relation == RelationKind.VEGETATION_ACTIVITY:
        return _vegetation(scene, weather_t, cfg)
    if relation == RelationKind.CONVECTIVE_DIFFUSION:
        return _wind(scene, weather_t, cfg)
    if relation == RelationKind.SEMANTIC_SIMILARITY:
        return _similarity(x, cfg.k_similarity)
    if relation == RelationKind.INTERNAL_CONTIGUITY:
        return _internal(scene)
    raise ValueError(f"unknown relation {relation}")
