"""The full predictor: context encoders, per-step relational graph
convolution, concatenation fusion, warm-started LSTM, prediction head(s);
plus the training loop and the ablation switchboard."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DivergenceDetected, EmptySplit, LengthMismatch
from .graphgen import RelationKind
from .nncore import (
    AdamState,
    LstmCell,
    Mlp,
    Module,
    RgcnLayer,
    Tensor,
    adam_step,
    concat,
    masked_mse,
    relation_coefficients,
)
from .nncore.optim import PlateauScheduler
from .scene import WeatherRecord

ALL_RELATIONS = tuple(RelationKind)

ABLATION_VARIANTS = ("none", "homogeneous", "static_graph", "no_warmup", "single_hour")


@dataclass
class ModelConfig:
    hidden_dim: int = 128
    rgcn_layers: int = 3
    lstm_layers: int = 1
    head_mode: str = "single"  # or "multi"
    fusion: str = "concat"
    t_pred: int = 12
    in_dim: int = 16
    env_dim: int = 6
    time_dim: int = 2
    seed: int = 0
    lr: float = 0.001
    batch_size: int = 8
    weight_decay: float = 1e-5
    plateau_factor: float = 0.5
    plateau_patience: int = 5
    early_stop_patience: int = 15
    max_epochs: int = 200
    use_edge_weights: bool = False
    dtype: str = "f64"  # or "f32"
    # ablation switches
    static_graph: bool = False
    homogeneous: bool = False
    edge_mask: tuple = tuple(r.name for r in ALL_RELATIONS)
    no_warmup: bool = False
    single_hour: bool = False

    def __post_init__(self):
        if self.t_pred < 1 or self.hidden_dim < 1:
            raise ValueError("t_pred and hidden_dim must be positive")
        self.edge_mask = tuple(RelationKind.from_name(r).name for r in self.edge_mask)

    def np_dtype(self):
        return np.float32 if self.dtype == "f32" else np.float64

    def to_dict(self) -> dict:
        d = asdict(self)
        d["edge_mask"] = list(d["edge_mask"])
        return d

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def with_variant(self, variant: str) -> "ModelConfig":
        cfg = copy.deepcopy(self)
        if variant == "none":
            return cfg
        if variant.startswith("drop:"):
            dropped = RelationKind.from_name(variant.split(":", 1)[1])
            cfg.edge_mask = tuple(r for r in cfg.edge_mask if r != dropped.name)
            return cfg
        if variant not in ABLATION_VARIANTS:
            raise ValueError(f"unknown ablation variant: {variant}")
        setattr(cfg, variant, True)
        return cfg


@dataclass
class PredictionBlock:
    values: np.ndarray  # (|V|, t_pred)
    variable: str = ""
    block_id: str = ""


def context_features(w: WeatherRecord) -> tuple[np.ndarray, np.ndarray]:
    """Global context per hour: scaled weather drivers (wind direction as a
    sin/cos pair) and the clock hour on the unit circle."""
    theta = math.radians(w.wind_dir_deg)
    env = np.array([
        w.ghi_wh_m2 / 1000.0,
        w.wind_speed_ms / 10.0,
        math.sin(theta),
        math.cos(theta),
        w.air_temp_c / 40.0,
        w.rel_humidity_pct / 100.0,
    ])
    phase = 2.0 * math.pi * w.clock_hour / 24.0
    time = np.array([math.sin(phase), math.cos(phase)])
    return env, time


class UrbanModel(Module):
    """Graph-sequence to multi-step per-node field predictor."""

    def __init__(self, cfg: ModelConfig):
        h = cfg.hidden_dim
        self.cfg = cfg
        self.num_relations = 1 if cfg.homogeneous else len(ALL_RELATIONS)
        self.enc_env = Mlp(cfg.env_dim, h, h)
        self.enc_time = Mlp(cfg.time_dim, h, h)
        dims = [cfg.in_dim] + [h] * cfg.rgcn_layers
        self.rgcn = [RgcnLayer(dims[i], dims[i + 1], self.num_relations)
                     for i in range(cfg.rgcn_layers)]
        self.fusion = Mlp(3 * h, h, h)
        self.h0_mlp = Mlp(h, h, h)
        if cfg.single_hour:
            self.heads = [Mlp(h, h, 1, final_activation=False)]
        elif cfg.head_mode == "multi":
            self.heads = [Mlp(h, h, 1, final_activation=False) for _ in range(cfg.t_pred)]
        else:
            self.heads = [Mlp(h, h, cfg.t_pred, final_activation=False)]
        self.lstm = LstmCell(h, h)

    # -- graph preparation ---------------------------------------------------

    def _prepare_graphs(self, graphs: list) -> list:
        cfg = self.cfg
        if cfg.static_graph:
            graphs = [graphs[0]] * len(graphs)
        keep = {RelationKind.from_name(r) for r in cfg.edge_mask}
        prepared = []
        cache: dict[int, dict] = {}
        for g in graphs:
            key = id(g)
            if key not in cache:
                masked = g.masked(keep)
                if cfg.homogeneous:
                    masked = masked.merged()
                cache[key] = relation_coefficients(masked, cfg.use_edge_weights)
            prepared.append(cache[key])
        return prepared

    def encode_context(self, w: WeatherRecord) -> tuple[Tensor, Tensor]:
        env, time = context_features(w)
        dt = self.cfg.np_dtype()
        e_env = self.enc_env(Tensor(env[None, :].astype(dt)))
        e_time = self.enc_time(Tensor(time[None, :].astype(dt)))
        return e_env, e_time

    def forward(self, graphs: list, weather: list, x_aug: np.ndarray) -> Tensor:
        cfg = self.cfg
        if not (len(graphs) == len(weather) == cfg.t_pred):
            raise LengthMismatch(
                f"expected {cfg.t_pred} graphs and weather rows, "
                f"got {len(graphs)}/{len(weather)}")
        n = graphs[0].num_nodes
        dt = cfg.np_dtype()
        coeffs = self._prepare_graphs(graphs)
        x0 = Tensor(np.asarray(x_aug, dtype=dt))
        ones = Tensor(np.ones((n, 1), dtype=dt))  # broadcasts context to nodes

        fused = []
        spatial_first = None
        for t, (w, co) in enumerate(zip(weather, coeffs)):
            h_sp = x0
            for layer in self.rgcn:
                h_sp = layer(h_sp, co)
            if t == 0:
                spatial_first = h_sp
            e_env, e_time = self.encode_context(w)
            x_t = self.fusion(concat([h_sp, ones @ e_env, ones @ e_time], axis=1))
            fused.append(x_t)

        if cfg.single_hour:
            cols = [self.heads[0](x_t) for x_t in fused]
            return concat(cols, axis=1)

        h = self.h0_mlp(spatial_first) if not cfg.no_warmup \
            else Tensor(np.zeros((n, cfg.hidden_dim), dtype=dt))
        c = Tensor(np.zeros((n, cfg.hidden_dim), dtype=dt))
        hidden_states = []
        for x_t in fused:
            h, c = self.lstm(x_t, h, c)
            hidden_states.append(h)

        if cfg.head_mode == "multi":
            cols = [head(h_t) for head, h_t in zip(self.heads, hidden_states)]
            return concat(cols, axis=1)
        return self.heads[0](hidden_states[-1])

    __call__ = forward


def build_model(cfg: ModelConfig) -> UrbanModel:
    model = UrbanModel(cfg)
    model.init_parameters(cfg.seed, dtype=cfg.np_dtype())
    return model


# ---------------------------------------------------------------------------
# Training

@dataclass
class TrainResult:
    model: UrbanModel
    history: list  # rows: (epoch, train_mse, val_mse, val_r2, lr)
    y_mu: float
    y_sigma: float
    best_epoch: int
    best_val_mse: float


def _target_stats(blocks) -> tuple[float, float]:
    vals = np.concatenate([b.target.values[b.target.valid_mask].ravel() for b in blocks])
    mu = float(vals.mean())
    sigma = float(vals.std())
    return mu, sigma if sigma > 0 else 1.0


def _val_scores(model, blocks, mu, sigma):
    sse = 0.0
    stot = 0.0
    count = 0
    truths = np.concatenate([b.target.values[b.target.valid_mask].ravel() for b in blocks])
    tmean = truths.mean()
    for b in blocks:
        pred = model(b.graphs, b.weather, b.x_aug).data * sigma + mu
        mask = b.target.valid_mask
        err = pred[mask] - b.target.values[mask]
        sse += float((err ** 2).sum())
        stot += float(((b.target.values[mask] - tmean) ** 2).sum())
        count += err.size
    mse = sse / count
    r2 = 1.0 - sse / stot if stot > 0 else float("nan")
    return mse, r2


def train(splits, cfg: ModelConfig) -> TrainResult:
    """Seeded training with masked MSE, plateau LR halving, early stopping.

    Returns the model restored to its best-validation parameters. Targets
    are standardized with train-split statistics for optimization; metrics
    and predictions are reported in target units.
    """
    if not splits.train or not splits.val:
        raise EmptySplit("train and val splits must be non-empty")
    model = build_model(cfg)
    named = model.named_parameters()
    adam = AdamState()
    sched = PlateauScheduler(lr=cfg.lr, factor=cfg.plateau_factor,
                             patience=cfg.plateau_patience)
    mu, sigma = _target_stats(splits.train)

    best_val = np.inf
    best_epoch = -1
    best_params = None
    stale = 0
    history = []
    for epoch in range(cfg.max_epochs):
        rng = np.random.default_rng([cfg.seed & 0x7FFFFFFF, 7919, epoch])
        order = rng.permutation(len(splits.train))
        train_sse = 0.0
        train_cnt = 0
        for lo in range(0, len(order), cfg.batch_size):
            batch = [splits.train[i] for i in order[lo:lo + cfg.batch_size]]
            model.zero_grad()
            loss = None
            for b in batch:
                y_std = (b.target.values - mu) / sigma
                pred = model(b.graphs, b.weather, b.x_aug)
                term = masked_mse(pred, y_std, b.target.valid_mask) * (1.0 / len(batch))
                loss = term if loss is None else loss + term
            lval = float(loss.data)
            if not np.isfinite(lval):
                raise DivergenceDetected(f"training loss is {lval} at epoch {epoch}")
            train_sse += lval * len(batch)
            train_cnt += len(batch)
            loss.backward()
            adam_step(named, adam, sched.lr, cfg.weight_decay)

        val_mse_std = _masked_mse_std(model, splits.val, mu, sigma)
        _, val_r2 = _val_scores(model, splits.val, mu, sigma)
        history.append((epoch, train_sse / train_cnt, val_mse_std, val_r2, sched.lr))

        if val_mse_std < best_val:
            best_val = val_mse_std
            best_epoch = epoch
            best_params = [t.data.copy() for _, t in named]
            stale = 0
        else:
            stale += 1
            if stale > cfg.early_stop_patience:
                break
        sched.step(val_mse_std)

    if best_params is not None:
        for (_, t), data in zip(named, best_params):
            t.data = data
            t.grad = np.zeros_like(data)
    return TrainResult(model=model, history=history, y_mu=mu, y_sigma=sigma,
                       best_epoch=best_epoch, best_val_mse=best_val)


def _masked_mse_std(model, blocks, mu, sigma) -> float:
    total = 0.0
    for b in blocks:
        y_std = (b.target.values - mu) / sigma
        pred = model(b.graphs, b.weather, b.x_aug)
        total += float(masked_mse(pred, y_std, b.target.valid_mask).data)
    return total / len(blocks)


def predict_block(result: TrainResult, block) -> PredictionBlock:
    values = result.model(block.graphs, block.weather, block.x_aug).data
    return PredictionBlock(values=values * result.y_sigma + result.y_mu,
                           variable=block.target.variable,
                           block_id=block.block_id)


# ---------------------------------------------------------------------------
# Ablation harness

@dataclass
class AblationReport:
    variant: str
    base_r2: float
    variant_r2: float
    base_rmse: float
    variant_rmse: float

    @property
    def degraded(self) -> bool:
        return self.variant_r2 < self.base_r2


def _test_scores(result: TrainResult, blocks) -> tuple[float, float]:
    preds, truths, masks = [], [], []
    for b in blocks:
        preds.append(predict_block(result, b).values[b.target.valid_mask])
        truths.append(b.target.values[b.target.valid_mask])
    p = np.concatenate([x.ravel() for x in preds])
    t = np.concatenate([x.ravel() for x in truths])
    sse = float(((p - t) ** 2).sum())
    stot = float(((t - t.mean()) ** 2).sum())
    r2 = 1.0 - sse / stot if stot > 0 else float("nan")
    return r2, math.sqrt(sse / len(t))


def ablate(splits, cfg: ModelConfig, variant: str) -> AblationReport:
    """Train the base configuration and one ablated variant with a shared
    seed, and report paired held-out scores."""
    base = train(splits, cfg)
    var = train(splits, cfg.with_variant(variant))
    eval_blocks = splits.test if splits.test else splits.val
    base_r2, base_rmse = _test_scores(base, eval_blocks)
    var_r2, var_rmse = _test_scores(var, eval_blocks)
    return AblationReport(variant=variant, base_r2=base_r2, variant_r2=var_r2,
                          base_rmse=base_rmse, variant_rmse=var_rmse)
