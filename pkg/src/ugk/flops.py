"""Analytic floating-point operation counts for one forward pass.

Counting conventions vary (a fused multiply-add can be 1 or 2 ops), so the
convention is an explicit parameter: `mac_ops=2` counts 2·m·n per m×n
matrix-vector product, `mac_ops=1` counts multiply-accumulates. The default
is 1, which places the full-scale configuration in line with published
hardware-counter figures for this architecture family.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class GraphStats:
    """Node and per-relation edge counts for a representative block."""

    num_nodes: int
    edges_per_relation: dict = field(default_factory=dict)

    @property
    def total_edges(self) -> int:
        return sum(self.edges_per_relation.values())


# Typical per-relation edge counts for a 50x50 block, rounded from generated
# summer-day sequences: shadow cones, vegetation disks at midday radius,
# wind disks at R_local=3, k=8 similarity, interior 8-neighborhoods.
FULL_SCALE_STATS = GraphStats(
    num_nodes=2500,
    edges_per_relation={
        "SHADOW": 9000,
        "VEGETATION_ACTIVITY": 12000,
        "CONVECTIVE_DIFFUSION": 14000,
        "SEMANTIC_SIMILARITY": 20000,
        "INTERNAL_CONTIGUITY": 12000,
    },
)


def linear_flops(batch: int, d_in: int, d_out: int, bias: bool = True,
                 mac_ops: int = 1) -> int:
    n = mac_ops * batch * d_in * d_out
    if bias:
        n += batch * d_out
    return n


def mlp_flops(batch: int, d_in: int, d_hidden: int, d_out: int,
              mac_ops: int = 1) -> int:
    # two linears plus elementwise activations
    return (linear_flops(batch, d_in, d_hidden, mac_ops=mac_ops)
            + linear_flops(batch, d_hidden, d_out, mac_ops=mac_ops)
            + batch * (d_hidden + d_out))


def count_flops(cfg, stats: GraphStats, mac_ops: int = 1) -> int:
    """Operations for one forward pass over one block sequence of t_pred
    steps: context encoders, the relational convolution stack (per-relation
    transform plus edge aggregation), fusion, warm-up, LSTM steps, head."""
    n = stats.num_nodes
    h = cfg.hidden_dim
    t = cfg.t_pred
    num_rel = 1 if cfg.homogeneous else len(stats.edges_per_relation)
    edges = stats.total_edges

    total = 0
    # context encoders run once per step on a single global row
    total += t * mlp_flops(1, cfg.env_dim, h, h, mac_ops)
    total += t * mlp_flops(1, cfg.time_dim, h, h, mac_ops)

    # relational stack, rebuilt at each step
    dims = [cfg.in_dim] + [h] * cfg.rgcn_layers
    per_step = 0
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        per_step += linear_flops(n, d_in, d_out, bias=False, mac_ops=mac_ops)  # self
        per_step += num_rel * linear_flops(n, d_in, d_out, bias=False, mac_ops=mac_ops)
        per_step += mac_ops * edges * d_in  # weighted scatter-add aggregation
        per_step += n * d_out  # activation
    total += t * per_step

    # fusion of spatial + broadcast context embeddings
    total += t * mlp_flops(n, 3 * h, h, h, mac_ops)

    if cfg.single_hour:
        total += t * mlp_flops(n, h, h, 1, mac_ops)
        return total

    total += mlp_flops(n, h, h, h, mac_ops)  # recurrent-state warm-up
    # LSTM: two 4h-wide matmuls plus gate nonlinearities and state updates
    lstm_step = (linear_flops(n, h, 4 * h, mac_ops=mac_ops)
                 + linear_flops(n, h, 4 * h, bias=False, mac_ops=mac_ops)
                 + 9 * n * h)
    total += t * lstm_step

    if cfg.head_mode == "multi":
        total += t * mlp_flops(n, h, h, 1, mac_ops)
    else:
        total += mlp_flops(n, h, h, t, mac_ops)
    return total


def full_scale_flops(cfg=None, mac_ops: int = 1) -> int:
    """The count for the full-scale configuration (2500-node blocks)."""
    if cfg is None:
        from .model import ModelConfig
        cfg = ModelConfig()
    return count_flops(cfg, FULL_SCALE_STATS, mac_ops=mac_ops)
