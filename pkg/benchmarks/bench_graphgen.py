"""Benchmark the compiled graph-construction kernels against the numpy
fallback on identical inputs.

Usage: python benchmarks/bench_graphgen.py [--rows 50] [--cols 50] [--reps 20]

The two backends must produce identical edge sets; this script verifies that
on every repetition while timing both.
"""

import argparse
import time

import numpy as np

from ugk.graphgen import GraphConfig
from ugk.graphgen import _kernels, _reference
from ugk.scene import Category, GridScene
from ugk.solar import SunState, shadow_azimuth
from scipy.special import cosdg, sindg, tandg


def make_scene(seed: int, rows: int, cols: int) -> GridScene:
    rng = np.random.default_rng(seed)
    cat = rng.integers(1, 6, size=(rows, cols)).astype(np.int64)
    bh = np.zeros((rows, cols))
    th = np.zeros((rows, cols))
    picks = rng.choice(rows * cols, size=rows * cols // 8, replace=False)
    half = len(picks) // 2
    for i in picks[:half]:
        r, c = divmod(int(i), cols)
        cat[r, c] = int(Category.BUILDING)
        bh[r, c] = rng.uniform(5.0, 60.0)
    for i in picks[half:]:
        r, c = divmod(int(i), cols)
        cat[r, c] = int(Category.TREE)
        th[r, c] = rng.uniform(2.0, 15.0)
    return GridScene(rows=rows, cols=cols, category=cat,
                     building_height_m=bh, canopy_height_m=th)


def bench(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=50)
    ap.add_argument("--cols", type=int, default=50)
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    cfg = GraphConfig()
    scene = make_scene(0, args.rows, args.cols)
    sun = SunState(35.0, 220.0)
    phi = shadow_azimuth(sun)
    tan_elev = float(tandg(sun.elevation_deg))
    reach = np.zeros((scene.rows, scene.cols))
    is_b = scene.category == Category.BUILDING
    is_t = scene.category == Category.TREE
    reach[is_b] = np.minimum(
        scene.building_height_m[is_b] / (tan_elev * scene.cell_size_m),
        cfg.r_max_building_grids)
    reach[is_t] = np.minimum(
        scene.canopy_height_m[is_t] / (tan_elev * scene.cell_size_m),
        cfg.r_max_tree_grids)
    un, ue = float(cosdg(phi)), float(sindg(phi))
    cth = float(cosdg(cfg.shadow_width_deg / 2.0))
    downwind = 47.0
    wn, we = float(cosdg(downwind)), float(sindg(downwind))

    cases = {
        "shadow": lambda impl: impl.shadow_edges(
            scene.category, reach, un, ue, cth, int(Category.BUILDING)),
        "vegetation": lambda impl: impl.vegetation_edges(
            scene.category, 5.5, int(Category.TREE)),
        "wind": lambda impl: impl.wind_edges(
            scene.category, cfg.r_local_grids, wn, we, cfg.lambda_wind, 0.75,
            int(Category.BUILDING)),
    }

    print(f"{args.rows}x{args.cols} scene, best of {args.reps} runs")
    print(f"{'builder':<12}{'compiled':>12}{'numpy':>12}{'speedup':>10}{'edges':>9}")
    for name, call in cases.items():
        tc, ec = bench(lambda: call(_kernels), args.reps)
        tn, en = bench(lambda: call(_reference), args.reps)
        ec = np.asarray(sorted(map(tuple, ec)))
        en = np.asarray(sorted(map(tuple, en)))
        assert ec.shape == en.shape and (ec == en).all(), f"{name}: backend mismatch"
        print(f"{name:<12}{tc * 1e3:>10.2f}ms{tn * 1e3:>10.2f}ms"
              f"{tn / tc:>9.1f}x{len(ec):>9}")


if __name__ == "__main__":
    main()
