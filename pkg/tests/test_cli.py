"""End-to-end CLI behavior on a tiny synthetic dataset: artifact layout,
config-hash stamping, cache hits, determinism, and validation failures."""

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from ugk.cli import main


def write_config(path: Path, data_dir: Path, out_dir: Path, **over) -> Path:
    cfg = {
        "data_dir": str(data_dir),
        "out_dir": str(out_dir),
        "target": "UTCI",
        "seed": 0,
        "model": {"hidden_dim": 8, "t_pred": 3, "max_epochs": 2, "batch_size": 4},
        "synth": {"num_blocks": 10, "rows": 10, "cols": 10, "hours": 3},
    }
    for key, value in over.items():
        if isinstance(value, dict):
            cfg.setdefault(key, {}).update(value)
        else:
            cfg[key] = value
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One synth + train run shared by the read-only CLI tests."""
    root = tmp_path_factory.mktemp("pipeline")
    cfg_path = write_config(root / "run.json", root / "data", root / "out")
    runner = CliRunner()
    for cmd in ("synth", "build-graphs", "train"):
        result = runner.invoke(main, [cmd, "--config", str(cfg_path)])
        assert result.exit_code == 0, f"{cmd}: {result.output}"
    return root, cfg_path, runner


def tree_bytes(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_synth_then_build_graphs_cache_hit(pipeline):
    root, cfg_path, runner = pipeline
    before = tree_bytes(root / "out" / "graphs")
    result = runner.invoke(main, ["build-graphs", "--config", str(cfg_path)])
    assert result.exit_code == 0
    assert tree_bytes(root / "out" / "graphs") == before


def test_eval_writes_metrics_with_config_hash(pipeline):
    root, cfg_path, runner = pipeline
    result = runner.invoke(main, ["eval", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    metrics = (root / "out" / "metrics.csv").read_text().splitlines()
    per_hour = (root / "out" / "per_hour.csv").read_text().splitlines()
    assert metrics[0].startswith("# config=")
    assert metrics[0] == per_hour[0]
    assert len(per_hour) == 2 + 3  # hash line + header + one row per step
    values = dict(line.split(",") for line in metrics[2:])
    assert float(values["rmse"]) >= float(values["mae"]) >= 0.0
    assert float(values["r2"]) <= 1.0


def test_predict_emits_target_format_grids(pipeline):
    root, cfg_path, runner = pipeline
    result = runner.invoke(main, ["predict", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    pred_dirs = sorted((root / "out" / "predictions").iterdir())
    assert pred_dirs
    grids = sorted(pred_dirs[0].glob("targets/UTCI/h*.csv"))
    assert len(grids) == 3
    rows = [line.split(",") for line in grids[0].read_text().splitlines()]
    assert len(rows) == 10 and all(len(r) == 10 for r in rows)
    float(rows[0][0])  # parses as a number


def test_eval_refuses_mismatched_graph_config(pipeline):
    root, cfg_path, runner = pipeline
    other = write_config(root / "other.json", root / "data", root / "out",
                         graph={"k_similarity": 4},
                         checkpoint=str(root / "out" / "model.ugk1"))
    result = runner.invoke(main, ["eval", "--config", str(other)])
    assert result.exit_code != 0


def test_pipeline_deterministic_across_runs(tmp_path):
    """synth, build-graphs, train, eval, flops run twice with the same seed
    and config produce byte-identical artifacts."""
    runner = CliRunner()
    outs = []
    for tag in ("a", "b"):
        cfg_path = write_config(tmp_path / f"{tag}.json", tmp_path / tag / "data",
                                tmp_path / tag / "out")
        for cmd in ("synth", "build-graphs", "train", "eval", "flops"):
            result = runner.invoke(main, [cmd, "--config", str(cfg_path)])
            assert result.exit_code == 0, f"{cmd}: {result.output}"
        outs.append({**tree_bytes(tmp_path / tag / "data"),
                     **tree_bytes(tmp_path / tag / "out")})
    assert outs[0] == outs[1]


def test_seed_changes_artifacts(tmp_path):
    runner = CliRunner()
    histories = []
    for seed in (0, 1):
        cfg_path = write_config(tmp_path / f"s{seed}.json",
                                tmp_path / f"s{seed}" / "data",
                                tmp_path / f"s{seed}" / "out", seed=seed)
        for cmd in ("synth", "train"):
            result = runner.invoke(main, [cmd, "--config", str(cfg_path)])
            assert result.exit_code == 0, result.output
        histories.append((tmp_path / f"s{seed}" / "out" / "history.csv").read_bytes())
    assert histories[0] != histories[1]


def test_gradcheck_subcommand(tmp_path):
    runner = CliRunner()
    cfg_path = write_config(tmp_path / "run.json", tmp_path / "data", tmp_path / "out")
    result = runner.invoke(main, ["gradcheck", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    line = (tmp_path / "out" / "gradcheck.csv").read_text().splitlines()[2]
    assert float(line.split(",")[0]) < 1e-4


def test_flops_subcommand_reports_full_scale(tmp_path):
    runner = CliRunner()
    cfg_path = write_config(tmp_path / "run.json", tmp_path / "missing",
                            tmp_path / "out")
    result = runner.invoke(main, ["flops", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "out" / "flops.csv").read_text().splitlines()
    scope, flops = lines[2].split(",")
    assert scope == "full_scale"
    # within a factor of two of the published full-scale measurement
    assert 9.13e9 / 2 <= float(flops) <= 9.13e9 * 2


def test_ablate_none_variant_matches_base(tmp_path):
    runner = CliRunner()
    cfg_path = write_config(tmp_path / "run.json", tmp_path / "data",
                            tmp_path / "out")
    runner_result = runner.invoke(main, ["synth", "--config", str(cfg_path)])
    assert runner_result.exit_code == 0
    result = runner.invoke(main, ["ablate", "--config", str(cfg_path),
                                  "--ablate", "none"])
    assert result.exit_code == 0, result.output
    line = (tmp_path / "out" / "ablation.csv").read_text().splitlines()[2]
    variant, base_r2, var_r2, base_rmse, var_rmse = line.split(",")
    assert variant == "none"
    assert base_r2 == var_r2 and base_rmse == var_rmse


def test_edge_mask_override_changes_config_hash(tmp_path):
    runner = CliRunner()
    hashes = []
    for i, mask in enumerate((None, "shadow,similarity,internal")):
        cfg_path = write_config(tmp_path / f"m{i}.json", tmp_path / f"m{i}" / "data",
                                tmp_path / f"m{i}" / "out")
        args = ["synth", "--config", str(cfg_path)]
        result = runner.invoke(main, args)
        assert result.exit_code == 0
        args = ["flops", "--config", str(cfg_path)]
        if mask:
            args += ["--edge-mask", mask]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        hashes.append((tmp_path / f"m{i}" / "out" / "flops.csv")
                      .read_text().splitlines()[0])
    assert hashes[0] != hashes[1]
