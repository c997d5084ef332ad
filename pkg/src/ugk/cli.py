"""Command-line entry point: graph building, training, evaluation,
prediction export, gradient checking, operation counting, synthetic data.

Every subcommand reads a JSON run-configuration file, applies CLI overrides,
and stamps the resulting configuration hash into each artifact it writes.
All outputs are canonical text (full-precision floats, sorted keys), so the
same configuration and seed always reproduce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import dataset as ds
from . import model as mdl
from .errors import UgkError
from .flops import GraphStats, count_flops, full_scale_flops
from .graphgen import BACKEND, GraphConfig
from .metrics import compute_metrics
from .model import ModelConfig, build_model
from .nncore import Tensor, gradcheck, load_checkpoint, save_checkpoint
from .scene import save_targets
from .synth import SurrogateCoefficients, generate_synthetic


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclasses.dataclass
class RunConfig:
    data_dir: str = "data"
    out_dir: str = "out"
    target: str = "UTCI"
    seed: int = 0
    variant: str = "none"
    checkpoint: str = ""
    graph: GraphConfig = dataclasses.field(default_factory=GraphConfig)
    model: ModelConfig = dataclasses.field(default_factory=ModelConfig)
    synth: dict = dataclasses.field(default_factory=dict)

    def digest(self) -> str:
        """Hash of everything that affects results (paths excluded)."""
        payload = {
            "graph": self.graph.to_dict(),
            "model": self.model.to_dict(),
            "target": self.target,
            "seed": self.seed,
            "variant": self.variant,
        }
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    @property
    def cache_dir(self) -> Path:
        return Path(self.out_dir) / "graphs"


def load_run_config(path: str, seed=None, edge_mask=None, ablate_variant=None,
                    target=None, out=None) -> RunConfig:
    raw = json.loads(Path(path).read_text()) if path else {}
    cfg = RunConfig(
        data_dir=raw.get("data_dir", "data"),
        out_dir=raw.get("out_dir", "out"),
        target=raw.get("target", "UTCI"),
        seed=int(raw.get("seed", 0)),
        variant=raw.get("variant", "none"),
        checkpoint=raw.get("checkpoint", ""),
        graph=GraphConfig(**raw.get("graph", {})),
        model=ModelConfig(**raw.get("model", {})),
        synth=raw.get("synth", {}),
    )
    if seed is not None:
        cfg.seed = seed
        cfg.model.seed = seed
    else:
        cfg.model.seed = cfg.seed
    if edge_mask:
        names = [n for part in edge_mask for n in part.split(",") if n]
        cfg.model.edge_mask = tuple(names)
        cfg.model.__post_init__()
    if ablate_variant:
        cfg.variant = ablate_variant
    if target:
        cfg.target = target
    if out:
        cfg.out_dir = out
    if not cfg.checkpoint:
        cfg.checkpoint = str(Path(cfg.out_dir) / "model.ugk1")
    return cfg


def _write_csv(path: Path, header_cols: str, rows: list, config_hash: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config={config_hash}\n")
        fh.write(header_cols + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, (int, str)) else _fmt(v)
                              for v in row) + "\n")


_shared = [
    click.option("--config", "config_path", default="", help="JSON run configuration."),
    click.option("--seed", type=int, default=None, help="Override the seed."),
    click.option("--edge-mask", multiple=True,
                 help="Relations to keep (repeatable or comma-separated)."),
    click.option("--ablate", "ablate_variant", default=None,
                 help="Ablation variant (homogeneous, static_graph, no_warmup, "
                      "single_hour, drop:<relation>, none)."),
    click.option("--target", default=None, help="Target variable name."),
    click.option("--out", default=None, help="Output directory."),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


def _run_cfg(kw) -> RunConfig:
    return load_run_config(kw.pop("config_path"), kw.pop("seed"),
                           kw.pop("edge_mask"), kw.pop("ablate_variant"),
                           kw.pop("target"), kw.pop("out"))


@click.group()
def main():
    """Urban graph-sequence modeling toolkit."""


@main.command("build-graphs")
@shared_options
def cmd_build_graphs(**kw):
    """Build (or reuse) the per-timestep graph cache for every block."""
    cfg = _run_cfg(kw)
    dirs = ds.list_block_dirs(cfg.data_dir)

    def build(path):
        block = ds.load_block(path, None, cfg.graph, cfg.cache_dir)
        return block.block_id, [g.num_edges() for g in block.graphs]

    with ThreadPoolExecutor(max_workers=ds.max_workers()) as pool:
        results = list(pool.map(build, dirs))
    rows = [(bid, t, n) for bid, counts in sorted(results)
            for t, n in enumerate(counts)]
    _write_csv(Path(cfg.out_dir) / "graph_summary.csv",
               "block,timestep,num_edges", rows, cfg.digest())
    click.echo(f"built graphs for {len(results)} blocks "
               f"(backend={BACKEND}, cache={cfg.cache_dir})")


def _load_splits(cfg: RunConfig) -> ds.DataSplits:
    return ds.load_dataset(cfg.data_dir, cfg.target, cfg.graph, cfg.seed,
                           cfg.cache_dir)


@main.command("train")
@shared_options
def cmd_train(**kw):
    """Train on the train split, checkpoint the best-validation model."""
    cfg = _run_cfg(kw)
    model_cfg = cfg.model.with_variant(cfg.variant)
    splits = _load_splits(cfg)
    result = mdl.train(splits, model_cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    extra = {
        "run_config": cfg.digest(),
        "graph_config": cfg.graph.digest(),
        "model_config": model_cfg.to_dict(),
        "target": cfg.target,
        "y_mu": result.y_mu,
        "y_sigma": result.y_sigma,
    }
    save_checkpoint(cfg.checkpoint, result.model.named_parameters(),
                    config_digest=cfg.digest(), extra=extra)
    _write_csv(out / "history.csv", "epoch,train_mse,val_mse,val_r2,lr",
               result.history, cfg.digest())
    click.echo(f"best val mse {result.best_val_mse!r} at epoch {result.best_epoch}; "
               f"checkpoint: {cfg.checkpoint}")


def _load_trained(cfg: RunConfig) -> tuple:
    """Rebuild the model from a checkpoint; refuse configuration mismatches."""
    blob = Path(cfg.checkpoint).read_bytes()
    hlen = int.from_bytes(blob[4:8], "little")
    raw = json.loads(blob[8:8 + hlen])
    model_cfg = ModelConfig(**raw["extra"]["model_config"])
    model = build_model(model_cfg)
    header = load_checkpoint(cfg.checkpoint, model.named_parameters())
    if header["extra"]["graph_config"] != cfg.graph.digest():
        raise UgkError(
            "checkpoint was trained against a different graph configuration "
            f"({header['extra']['graph_config']} != {cfg.graph.digest()})")
    result = mdl.TrainResult(model=model, history=[],
                             y_mu=header["extra"]["y_mu"],
                             y_sigma=header["extra"]["y_sigma"],
                             best_epoch=-1, best_val_mse=float("nan"))
    return result, header


@main.command("eval")
@shared_options
def cmd_eval(**kw):
    """Score the checkpoint on the test split; write overall and per-hour CSV."""
    cfg = _run_cfg(kw)
    result, _ = _load_trained(cfg)
    splits = _load_splits(cfg)
    blocks = splits.test or splits.val
    preds = np.concatenate([mdl.predict_block(result, b).values for b in blocks])
    truth = np.concatenate([b.target.values for b in blocks])
    mask = np.concatenate([b.target.valid_mask for b in blocks])
    report = compute_metrics(preds, truth, mask)
    out = Path(cfg.out_dir)
    _write_csv(out / "metrics.csv", "metric,value",
               [("mae", report.mae), ("rmse", report.rmse), ("r2", report.r2),
                ("n_valid", report.n_valid)], cfg.digest())
    _write_csv(out / "per_hour.csv", "hour,mae,rmse,r2",
               [(h, s.mae, s.rmse, s.r2) for h, s in enumerate(report.per_hour)],
               cfg.digest())
    click.echo(f"r2={report.r2!r} rmse={report.rmse!r} mae={report.mae!r} "
               f"over {report.n_valid} nodes x {len(report.per_hour)} hours")


@main.command("predict")
@shared_options
def cmd_predict(**kw):
    """Export per-hour prediction grids for the test split."""
    cfg = _run_cfg(kw)
    result, _ = _load_trained(cfg)
    splits = _load_splits(cfg)
    blocks = splits.test or splits.val
    out = Path(cfg.out_dir) / "predictions"
    for b in blocks:
        pred = mdl.predict_block(result, b)
        bdir = out / b.block_id
        save_targets(pred.values, cfg.target, b.scene, b.weather, bdir)
        (bdir / "config.txt").write_text(f"config={cfg.digest()}\n")
    click.echo(f"wrote predictions for {len(blocks)} blocks under {out}")


@main.command("gradcheck")
@shared_options
def cmd_gradcheck(**kw):
    """Finite-difference check of the full model on a tiny instance."""
    cfg = _run_cfg(kw)
    report = run_model_gradcheck(seed=cfg.seed)
    out = Path(cfg.out_dir)
    _write_csv(out / "gradcheck.csv", "max_rel_err,worst,checked",
               [(report.max_rel_err, report.worst, report.checked)], cfg.digest())
    click.echo(f"gradcheck max relative error {report.max_rel_err!r} "
               f"over {report.checked} entries (worst: {report.worst})")
    if report.max_rel_err >= 1e-4:
        sys.exit(1)


def run_model_gradcheck(seed: int = 0, hidden: int = 6, t_pred: int = 3,
                        rows: int = 4, cols: int = 4):
    """Build a tiny full model on a random scene and gradcheck every
    parameter against central differences."""
    from .synth import _diurnal_weather, _random_scene
    from .scene import augment_neighbor_features, compute_static_features
    from .graphgen import build_graph_sequence
    from .nncore import masked_mse

    rng = np.random.default_rng(seed)
    scene = _random_scene(rows, cols, "gradcheck", rng)
    weather = _diurnal_weather(t_pred, rng)[:t_pred]
    x = compute_static_features(scene)
    graphs = build_graph_sequence(scene, x, weather, GraphConfig(k_similarity=3))
    x_aug = augment_neighbor_features(scene, x)
    model_cfg = ModelConfig(hidden_dim=hidden, t_pred=t_pred, seed=seed)
    model = build_model(model_cfg)
    y = rng.standard_normal((scene.num_nodes, t_pred))
    mask = np.ones(scene.num_nodes, dtype=bool)

    def loss():
        return masked_mse(model(graphs, weather, x_aug), y, mask)

    return gradcheck(loss, model.named_parameters())


@main.command("flops")
@shared_options
def cmd_flops(**kw):
    """Analytic operation counts for one forward pass."""
    cfg = _run_cfg(kw)
    # full-scale reference uses the default (full-size) model configuration
    rows = [("full_scale", full_scale_flops())]
    data = Path(cfg.data_dir)
    if data.is_dir() and any(p.is_dir() for p in data.iterdir()):
        block = ds.load_block(ds.list_block_dirs(data)[0], None, cfg.graph,
                              cfg.cache_dir)
        stats = GraphStats(
            num_nodes=block.scene.num_nodes,
            edges_per_relation={r.name: int(np.mean([g.num_edges(r) for g in block.graphs]))
                                for r in block.graphs[0].edges},
        )
        rows.append(("first_block", count_flops(cfg.model, stats)))
    _write_csv(Path(cfg.out_dir) / "flops.csv", "scope,flops", rows, cfg.digest())
    for scope, n in rows:
        click.echo(f"{scope}: {n} flops per forward pass")


@main.command("synth")
@shared_options
def cmd_synth(**kw):
    """Generate a synthetic dataset with a known closed-form target rule."""
    cfg = _run_cfg(kw)
    s = cfg.synth
    coeffs = SurrogateCoefficients(**s.get("coefficients", {}))
    out = generate_synthetic(
        cfg.data_dir,
        num_blocks=int(s.get("num_blocks", 16)),
        rows=int(s.get("rows", 20)),
        cols=int(s.get("cols", 20)),
        hours=int(s.get("hours", 12)),
        seed=cfg.seed,
        variable=cfg.target,
        coeffs=coeffs,
        graph_cfg=cfg.graph,
    )
    click.echo(f"wrote synthetic dataset to {out}")


@main.command("ablate")
@shared_options
def cmd_ablate(**kw):
    """Train base and ablated variant with a shared seed; report both."""
    cfg = _run_cfg(kw)
    splits = _load_splits(cfg)
    report = mdl.ablate(splits, cfg.model, cfg.variant)
    _write_csv(Path(cfg.out_dir) / "ablation.csv",
               "variant,base_r2,variant_r2,base_rmse,variant_rmse",
               [(report.variant, report.base_r2, report.variant_r2,
                 report.base_rmse, report.variant_rmse)], cfg.digest())
    click.echo(f"{report.variant}: base r2={report.base_r2!r}, "
               f"variant r2={report.variant_r2!r}")


def entrypoint():
    try:
        main(standalone_mode=True)
    except UgkError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    entrypoint()
