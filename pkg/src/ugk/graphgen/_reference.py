"""Numpy fallback kernels for the per-timestep edge builders.

Same call signatures and float semantics as the compiled module
(_kernels.pyx); the two are interchangeable. These sweep over the window
of candidate offsets and vectorize across source cells, so per-offset
geometry (distance, angular deviation, wind stretch) is computed once.
"""

from __future__ import annotations

import math

import numpy as np

_EMPTY = np.zeros((0, 2), dtype=np.int64)


def _collect(pairs):
    if not pairs:
        return _EMPTY
    return np.concatenate(pairs, axis=0)


def shadow_edges(category: np.ndarray, reach: np.ndarray, un: float, ue: float,
                 cth: float, building_code: int) -> np.ndarray:
    """Edges from shading cells (reach > 0) to non-building cells within
    their reach and inside the angular cone around (un, ue)."""
    rows, cols = category.shape
    rmax = float(reach.max(initial=0.0))
    if rmax <= 0.0:
        return _EMPTY
    box = int(math.ceil(rmax))
    node = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    not_building = category != building_code
    pairs = []
    for dr in range(-box, box + 1):
        for dc in range(-box, box + 1):
            if dr == 0 and dc == 0:
                continue
            d = math.sqrt(float(dr * dr + dc * dc))
            if d > rmax:
                continue
            cosdev = (-dr * un + dc * ue) / d
            if not cosdev >= cth:
                continue
            src_r = slice(max(0, -dr), rows - max(0, dr))
            src_c = slice(max(0, -dc), cols - max(0, dc))
            dst_r = slice(max(0, dr), rows - max(0, -dr))
            dst_c = slice(max(0, dc), cols - max(0, -dc))
            ok = (reach[src_r, src_c] >= d) & not_building[dst_r, dst_c]
            if ok.any():
                pairs.append(np.stack(
                    [node[src_r, src_c][ok], node[dst_r, dst_c][ok]], axis=1))
    return _collect(pairs)


def vegetation_edges(category: np.ndarray, radius: float, tree_code: int) -> np.ndarray:
    """Edges from every tree cell to all other cells within `radius`."""
    rows, cols = category.shape
    box = int(math.ceil(radius))
    node = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    is_tree = category == tree_code
    if not is_tree.any():
        return _EMPTY
    pairs = []
    for dr in range(-box, box + 1):
        for dc in range(-box, box + 1):
            if dr == 0 and dc == 0:
                continue
            d = math.sqrt(float(dr * dr + dc * dc))
            if not d <= radius:
                continue
            src_r = slice(max(0, -dr), rows - max(0, dr))
            src_c = slice(max(0, -dc), cols - max(0, dc))
            dst_r = slice(max(0, dr), rows - max(0, -dr))
            dst_c = slice(max(0, dc), cols - max(0, -dc))
            ok = is_tree[src_r, src_c]
            if ok.any():
                pairs.append(np.stack(
                    [node[src_r, src_c][ok], node[dst_r, dst_c][ok]], axis=1))
    return _collect(pairs)


def wind_edges(category: np.ndarray, r_local: float, wn: float, we: float,
               lam: float, vratio: float, building_code: int) -> np.ndarray:
    """Edges between non-building cells whose wind-stretched effective
    distance d / alpha stays within r_local. (wn, we) is the downwind unit
    vector; alpha = 1 + lam * cos(dev) * vratio."""
    rows, cols = category.shape
    box = int(math.ceil(r_local * (1.0 + lam)))
    node = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    open_cell = category != building_code
    pairs = []
    for dr in range(-box, box + 1):
        for dc in range(-box, box + 1):
            if dr == 0 and dc == 0:
                continue
            d = math.sqrt(float(dr * dr + dc * dc))
            cosdev = (-dr * wn + dc * we) / d
            alpha = 1.0 + lam * cosdev * vratio
            if not d / alpha <= r_local:
                continue
            src_r = slice(max(0, -dr), rows - max(0, dr))
            src_c = slice(max(0, -dc), cols - max(0, dc))
            dst_r = slice(max(0, dr), rows - max(0, -dr))
            dst_c = slice(max(0, dc), cols - max(0, -dc))
            ok = open_cell[src_r, src_c] & open_cell[dst_r, dst_c]
            if ok.any():
                pairs.append(np.stack(
                    [node[src_r, src_c][ok], node[dst_r, dst_c][ok]], axis=1))
    return _collect(pairs)
