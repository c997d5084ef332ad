"""Shared helpers: seeded random scenes and weather sequences."""

import numpy as np
import pytest

from ugk.graphgen import GraphConfig
from ugk.scene import Category, GridScene, WeatherRecord


def make_scene(seed: int, rows: int = 20, cols: int = 20) -> GridScene:
    """Random scene with buildings, trees and mixed ground materials."""
    rng = np.random.default_rng(seed)
    cat = rng.integers(1, 6, size=(rows, cols)).astype(np.int64)
    bh = np.zeros((rows, cols))
    th = np.zeros((rows, cols))
    cap = max(3, rows * cols // 20)
    n_build = int(rng.integers(2, cap))
    n_tree = int(rng.integers(2, cap))
    flat = rng.choice(rows * cols, size=n_build + n_tree, replace=False)
    for i in flat[:n_build]:
        r, c = divmod(int(i), cols)
        cat[r, c] = int(Category.BUILDING)
        bh[r, c] = float(rng.uniform(3.0, 60.0))
    for i in flat[n_build:]:
        r, c = divmod(int(i), cols)
        cat[r, c] = int(Category.TREE)
        th[r, c] = float(rng.uniform(2.0, 15.0))
    return GridScene(rows=rows, cols=cols, category=cat, building_height_m=bh,
                     canopy_height_m=th, block_id=f"scene{seed}")


def make_weather(seed: int, hours: int = 4) -> list:
    """Random daytime weather records with explicit solar angles."""
    rng = np.random.default_rng(seed + 10_000)
    records = []
    for t in range(hours):
        records.append(WeatherRecord(
            hour_index=t,
            clock_hour=8.0 + t,
            ghi_wh_m2=float(rng.uniform(0.0, 1100.0)),
            wind_speed_ms=float(rng.uniform(0.0, 10.0)),
            wind_dir_deg=float(rng.uniform(0.0, 360.0)),
            air_temp_c=float(rng.uniform(20.0, 35.0)),
            rel_humidity_pct=float(rng.uniform(40.0, 95.0)),
            solar_elev_deg=float(rng.uniform(2.0, 88.0)),
            solar_azim_deg=float(rng.uniform(0.0, 360.0)),
        ))
    return records


@pytest.fixture
def graph_config() -> GraphConfig:
    return GraphConfig()
