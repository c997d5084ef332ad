"""Loading block directories into model-ready samples, with a per-timestep
graph cache keyed by the construction-parameter digest."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import TooFewBlocks
from .graphgen import (
    GraphConfig,
    build_graph_sequence,
    read_graph_file,
    write_graph_file,
)
from .scene import (
    GridScene,
    TargetField,
    augment_neighbor_features,
    compute_static_features,
    load_scene,
    load_targets,
    load_weather,
    split_dataset,
)


def max_workers() -> int:
    """Parallelism cap: UGK_THREADS when set, else the CPU count."""
    env = os.environ.get("UGK_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class Block:
    block_id: str
    scene: GridScene
    x_aug: object  # (|V|, 16) features: static columns + neighbor means
    weather: list
    graphs: list
    target: TargetField | None = None


@dataclass
class DataSplits:
    train: list
    val: list
    test: list

    @property
    def all_blocks(self) -> list:
        return self.train + self.val + self.test


def list_block_dirs(root: str | Path) -> list:
    root = Path(root)
    dirs = sorted(p for p in root.iterdir() if (p / "meta.json").exists())
    if not dirs:
        raise TooFewBlocks(f"no block directories under {root}")
    return dirs


def build_or_load_graphs(scene, x, weather, cfg: GraphConfig,
                         cache_dir: str | Path | None = None) -> list:
    """Build the graph sequence, or reuse cached files when they exist for
    the same construction parameters (cache keyed by cfg.digest())."""
    if cache_dir is None:
        return build_graph_sequence(scene, x, weather, cfg)
    digest = cfg.digest()
    cdir = Path(cache_dir) / digest / scene.block_id
    paths = [cdir / f"t{w.hour_index:02d}.graph" for w in weather]
    if all(p.exists() for p in paths):
        graphs = []
        for p in paths:
            g, stored = read_graph_file(p)
            if stored != digest:
                break
            graphs.append(g)
        else:
            return graphs
    graphs = build_graph_sequence(scene, x, weather, cfg)
    cdir.mkdir(parents=True, exist_ok=True)
    for g, p in zip(graphs, paths):
        write_graph_file(g, p, digest)
    return graphs


def load_block(path: str | Path, variable: str | None, cfg: GraphConfig,
               cache_dir: str | Path | None = None) -> Block:
    path = Path(path)
    scene = load_scene(path)
    weather = load_weather(path / "weather.csv")
    x = compute_static_features(scene)
    graphs = build_or_load_graphs(scene, x, weather, cfg, cache_dir)
    target = load_targets(path, variable, scene, weather) if variable else None
    return Block(
        block_id=scene.block_id,
        scene=scene,
        x_aug=augment_neighbor_features(scene, x),
        weather=weather,
        graphs=graphs,
        target=target,
    )


def load_dataset(root: str | Path, variable: str, cfg: GraphConfig, seed: int,
                 cache_dir: str | Path | None = None) -> DataSplits:
    """Load every block under root and split 70/20/10 by block id."""
    dirs = {p.name: p for p in list_block_dirs(root)}
    train_ids, val_ids, test_ids = split_dataset(sorted(dirs), seed)

    def load_many(ids):
        return [load_block(dirs[i], variable, cfg, cache_dir) for i in sorted(ids)]

    return DataSplits(train=load_many(train_ids), val=load_many(val_ids),
                      test=load_many(test_ids))
