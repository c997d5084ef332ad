"""Rasterized urban scenes, weather series and target fields.

A scene directory holds three rows x cols CSV layers plus a meta.json:

    class.csv            integer class codes (see Category)
    building_height.csv  building height in meters, 0 where no building
    tree_height.csv      canopy height in meters, 0 where no tree
    meta.json            rows, cols, cell_size_m, latitude, longitude, block_id
    weather.csv          hour,clock,ghi,wind_speed,wind_dir,air_temp,rh[,solar_elev,solar_azim]
    targets/<VAR>/h<HH>.csv   one grid per weather record, HH = clock hour

Row 0 is the northernmost row, column 0 the westernmost column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingLayer,
    NegativeHeight,
    TooFewBlocks,
    UnknownCategory,
)

EPS_NORM = 1e-6

TARGET_VARIABLES = ("UTCI", "PET", "AT", "MRT", "WS", "RH")


class Category(IntEnum):
    """Per-cell land cover class. Codes 1..5 are the ground materials."""

    PAVEMENT = 1
    TERRE_BATTUE = 2
    LOAMY_SOIL = 3
    UNSEALED_SOIL = 4
    DEEP_WATER = 5
    BUILDING = 6
    TREE = 7


GROUND_MATERIALS = (
    Category.PAVEMENT,
    Category.TERRE_BATTUE,
    Category.LOAMY_SOIL,
    Category.UNSEALED_SOIL,
    Category.DEEP_WATER,
)

STATIC_FEATURE_NAMES = (
    "building_height",
    "canopy_height",
    "mat_pavement",
    "mat_terre_battue",
    "mat_loamy_soil",
    "mat_unsealed_soil",
    "mat_deep_water",
    "is_built",
)


@dataclass(frozen=True)
class CellRecord:
    category: Category
    building_height_m: float = 0.0
    canopy_height_m: float = 0.0


@dataclass
class GridScene:
    """One urban block: per-cell class and heights on a regular grid."""

    rows: int
    cols: int
    category: np.ndarray  # (rows, cols) int64
    building_height_m: np.ndarray  # (rows, cols) float64
    canopy_height_m: np.ndarray  # (rows, cols) float64
    cell_size_m: float = 4.0
    latitude: float = 1.35
    longitude: float = 103.82
    block_id: str = "block"

    def __post_init__(self):
        self.category = np.asarray(self.category, dtype=np.int64)
        self.building_height_m = np.asarray(self.building_height_m, dtype=np.float64)
        self.canopy_height_m = np.asarray(self.canopy_height_m, dtype=np.float64)
        self.validate()

    @property
    def num_nodes(self) -> int:
        return self.rows * self.cols

    def cell(self, node: int) -> CellRecord:
        r, c = divmod(node, self.cols)
        return CellRecord(
            Category(int(self.category[r, c])),
            float(self.building_height_m[r, c]),
            float(self.canopy_height_m[r, c]),
        )

    @property
    def cells(self) -> list[CellRecord]:
        return [self.cell(i) for i in range(self.num_nodes)]

    def validate(self):
        if self.rows < 2 or self.cols < 2:
            raise DimensionMismatch(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if self.cell_size_m <= 0:
            raise DimensionMismatch("cell_size_m must be positive")
        for name, arr in (
            ("class", self.category),
            ("building_height", self.building_height_m),
            ("tree_height", self.canopy_height_m),
        ):
            if arr.shape != (self.rows, self.cols):
                raise DimensionMismatch(
                    f"layer {name} has shape {arr.shape}, expected {(self.rows, self.cols)}"
                )
        valid_codes = {int(c) for c in Category}
        codes = set(np.unique(self.category).tolist())
        if not codes <= valid_codes:
            raise UnknownCategory(f"unknown class codes {sorted(codes - valid_codes)}")
        if (self.building_height_m < 0).any() or (self.canopy_height_m < 0).any():
            raise NegativeHeight("heights must be non-negative")
        is_building = self.category == Category.BUILDING
        is_tree = self.category == Category.TREE
        if not ((self.building_height_m > 0) == is_building).all():
            raise NegativeHeight("building_height must be > 0 exactly on Building cells")
        if not ((self.canopy_height_m > 0) == is_tree).all():
            raise NegativeHeight("tree_height must be > 0 exactly on Tree cells")


@dataclass(frozen=True)
class WeatherRecord:
    hour_index: int
    clock_hour: float
    ghi_wh_m2: float
    wind_speed_ms: float
    wind_dir_deg: float  # meteorological: direction the wind blows FROM
    air_temp_c: float
    rel_humidity_pct: float
    solar_elev_deg: float | None = None
    solar_azim_deg: float | None = None

    def __post_init__(self):
        if self.ghi_wh_m2 < 0 or self.wind_speed_ms < 0:
            raise DimensionMismatch("radiation and wind speed must be non-negative")
        if not 0 <= self.wind_dir_deg < 360:
            raise DimensionMismatch("wind_dir_deg must be in [0, 360)")


@dataclass
class StaticFeatureMatrix:
    values: np.ndarray  # (|V|, 8), normalized
    raw: np.ndarray  # (|V|, 8), pre-normalization
    feature_names: tuple = STATIC_FEATURE_NAMES


@dataclass
class TargetField:
    variable: str
    values: np.ndarray  # (|V|, T)
    valid_mask: np.ndarray  # (|V|,) bool, False on building nodes


# ---------------------------------------------------------------------------
# I/O

_LAYERS = ("class.csv", "building_height.csv", "tree_height.csv", "meta.json")


def _fmt(x: float) -> str:
    """Canonical full-precision decimal text for a float."""
    return repr(float(x))


def _read_grid(path: Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split(",")])
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{path.name}: ragged or empty grid")
    return arr


def _write_grid(path: Path, arr: np.ndarray, integer: bool = False):
    with open(path, "w") as fh:
        for row in arr:
            if integer:
                fh.write(",".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_scene(path: str | Path) -> GridScene:
    path = Path(path)
    for name in _LAYERS:
        if not (path / name).exists():
            raise MissingLayer(f"missing {name} in {path}")
    meta = json.loads((path / "meta.json").read_text())
    cat = _read_grid(path / "class.csv")
    bh = _read_grid(path / "building_height.csv")
    th = _read_grid(path / "tree_height.csv")
    rows, cols = int(meta["rows"]), int(meta["cols"])
    if cat.shape != (rows, cols):
        raise DimensionMismatch(f"class.csv is {cat.shape}, meta says {(rows, cols)}")
    if (bh < 0).any() or (th < 0).any():
        raise NegativeHeight("negative entry in a height layer")
    return GridScene(
        rows=rows,
        cols=cols,
        category=cat.astype(np.int64),
        building_height_m=bh,
        canopy_height_m=th,
        cell_size_m=float(meta["cell_size_m"]),
        latitude=float(meta["latitude"]),
        longitude=float(meta["longitude"]),
        block_id=str(meta["block_id"]),
    )


def save_scene(scene: GridScene, path: str | Path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    _write_grid(path / "class.csv", scene.category, integer=True)
    _write_grid(path / "building_height.csv", scene.building_height_m)
    _write_grid(path / "tree_height.csv", scene.canopy_height_m)
    meta = {
        "rows": scene.rows,
        "cols": scene.cols,
        "cell_size_m": scene.cell_size_m,
        "latitude": scene.latitude,
        "longitude": scene.longitude,
        "block_id": scene.block_id,
    }
    (path / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_weather(path: str | Path) -> list[WeatherRecord]:
    path = Path(path)
    records = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        has_solar = "solar_elev" in header
        for line in fh:
            line = line.strip()
            if not line:
                continue
            toks = line.split(",")
            records.append(
                WeatherRecord(
                    hour_index=int(toks[0]),
                    clock_hour=float(toks[1]),
                    ghi_wh_m2=float(toks[2]),
                    wind_speed_ms=float(toks[3]),
                    wind_dir_deg=float(toks[4]),
                    air_temp_c=float(toks[5]),
                    rel_humidity_pct=float(toks[6]),
                    solar_elev_deg=float(toks[7]) if has_solar else None,
                    solar_azim_deg=float(toks[8]) if has_solar else None,
                )
            )
    return records


def save_weather(records: list[WeatherRecord], path: str | Path):
    has_solar = records[0].solar_elev_deg is not None
    cols = "hour,clock,ghi,wind_speed,wind_dir,air_temp,rh"
    if has_solar:
        cols += ",solar_elev,solar_azim"
    with open(path, "w") as fh:
        fh.write(cols + "\n")
        for w in records:
            row = [
                str(w.hour_index),
                _fmt(w.clock_hour),
                _fmt(w.ghi_wh_m2),
                _fmt(w.wind_speed_ms),
                _fmt(w.wind_dir_deg),
                _fmt(w.air_temp_c),
                _fmt(w.rel_humidity_pct),
            ]
            if has_solar:
                row += [_fmt(w.solar_elev_deg), _fmt(w.solar_azim_deg)]
            fh.write(",".join(row) + "\n")


def load_targets(path: str | Path, variable: str, scene: GridScene,
                 weather: list[WeatherRecord]) -> TargetField:
    path = Path(path) / "targets" / variable
    cols = []
    for w in weather:
        fname = path / f"h{int(w.clock_hour):02d}.csv"
        if not fname.exists():
            raise MissingLayer(f"missing target grid {fname}")
        grid = _read_grid(fname)
        if grid.shape != (scene.rows, scene.cols):
            raise DimensionMismatch(f"{fname.name} is {grid.shape}")
        cols.append(grid.reshape(-1))
    values = np.stack(cols, axis=1)
    mask = (scene.category != Category.BUILDING).reshape(-1)
    return TargetField(variable=variable, values=values, valid_mask=mask)


def save_targets(field_values: np.ndarray, variable: str, scene: GridScene,
                 weather: list[WeatherRecord], path: str | Path):
    """Write one grid file per weather record, mirroring load_targets."""
    out = Path(path) / "targets" / variable
    out.mkdir(parents=True, exist_ok=True)
    for t, w in enumerate(weather):
        grid = field_values[:, t].reshape(scene.rows, scene.cols)
        _write_grid(out / f"h{int(w.clock_hour):02d}.csv", grid)


# ---------------------------------------------------------------------------
# Features

def compute_static_features(scene: GridScene) -> StaticFeatureMatrix:
    """8 static per-node features, normalized to [0, 1].

    Columns: building height, canopy height, 5-way ground-material one-hot
    (all-zero on Building/Tree rows), is_built flag. Heights are min-max
    normalized per column with an epsilon-guarded denominator; the binary
    columns are already in [0, 1] and pass through unchanged.
    """
    n = scene.num_nodes
    cat = scene.category.reshape(-1)
    raw = np.zeros((n, 8), dtype=np.float64)
    raw[:, 0] = scene.building_height_m.reshape(-1)
    raw[:, 1] = scene.canopy_height_m.reshape(-1)
    for j, mat in enumerate(GROUND_MATERIALS):
        raw[:, 2 + j] = (cat == mat).astype(np.float64)
    raw[:, 7] = (cat == Category.BUILDING).astype(np.float64)

    values = raw.copy()
    for col in (0, 1):
        lo = raw[:, col].min()
        rng = raw[:, col].max() - lo
        values[:, col] = (raw[:, col] - lo) / max(rng, EPS_NORM)
    return StaticFeatureMatrix(values=values, raw=raw)


_MOORE = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def augment_neighbor_features(scene: GridScene, x: StaticFeatureMatrix) -> np.ndarray:
    """Append the mean of each node's existing Moore-neighbor feature rows.

    Border cells average over however many neighbors they actually have.
    Returns a |V| x 16 matrix whose first 8 columns are x.values unchanged.
    """
    rows, cols = scene.rows, scene.cols
    grid = x.values.reshape(rows, cols, 8)
    acc = np.zeros_like(grid)
    cnt = np.zeros((rows, cols, 1), dtype=np.float64)
    for dr, dc in _MOORE:
        src_r = slice(max(0, -dr), rows - max(0, dr))
        src_c = slice(max(0, -dc), cols - max(0, dc))
        dst_r = slice(max(0, dr), rows - max(0, -dr))
        dst_c = slice(max(0, dc), cols - max(0, -dc))
        acc[dst_r, dst_c] += grid[src_r, src_c]
        cnt[dst_r, dst_c] += 1.0
    mean = (acc / cnt).reshape(-1, 8)
    return np.concatenate([x.values, mean], axis=1)


def split_dataset(block_ids, seed: int):
    """Deterministic 70/20/10 split of block ids (train, val, test)."""
    ids = list(block_ids)
    n = len(ids)
    if n < 10:
        raise TooFewBlocks(f"need at least 10 blocks, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    n_train = round(0.7 * n)
    n_val = round(0.2 * n)
    return (
        shuffled[:n_train],
        shuffled[n_train:n_train + n_val],
        shuffled[n_train + n_val:],
    )
