"""Layers: linear, PReLU, 2-layer MLP, relational graph convolution, LSTM cell.

Parameters are plain Tensors registered by name; initialization derives one
RNG stream per parameter from (seed, name), so adding or reordering layers
never shifts another layer's draw.
"""

from __future__ import annotations

import zlib

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor, aggregate, concat, prelu, sigmoid, spmm, tanh


class Module:
    """Base class: walks attributes to collect named parameters."""

    def named_parameters(self, prefix: str = ""):
        out = []
        params = getattr(self, "_params", {})
        for name, t in params.items():
            out.append((f"{prefix}{name}", t))
        for attr, value in vars(self).items():
            if attr == "_params":
                continue
            if isinstance(value, Module):
                out.extend(value.named_parameters(f"{prefix}{attr}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{prefix}{attr}.{i}."))
        return out

    def parameters(self):
        return [t for _, t in self.named_parameters()]

    def zero_grad(self):
        for t in self.parameters():
            t.zero_grad()

    def init_parameters(self, seed: int, dtype=np.float64):
        for name, t in self.named_parameters():
            rng = np.random.default_rng([seed & 0x7FFFFFFF, zlib.crc32(name.encode())])
            shape = t.data.shape
            if name.endswith(".bias") or t.data.ndim <= 1:
                draw = np.zeros(shape)
            else:
                fan_in, fan_out = shape[0], shape[-1]
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                draw = rng.uniform(-limit, limit, size=shape)
            t.data = draw.astype(dtype)
            t.grad = np.zeros_like(t.data)
        self._post_init()

    def _post_init(self):
        for value in vars(self).values():
            if isinstance(value, Module):
                value._post_init()
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        item._post_init()

    def astype(self, dtype):
        for t in self.parameters():
            t.data = t.data.astype(dtype)
            t.grad = np.zeros_like(t.data)
        return self


def _param(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int):
        self._params = {"weight": _param((d_in, d_out)), "bias": _param((d_out,))}

    @property
    def weight(self):
        return self._params["weight"]

    @property
    def bias(self):
        return self._params["bias"]

    def forward(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias

    __call__ = forward


class PRelu(Module):
    """One learnable slope per layer, initialized to 0.25."""

    def __init__(self):
        self._params = {"slope": _param(())}

    def _post_init(self):
        self._params["slope"].data = np.full((), 0.25, dtype=self._params["slope"].data.dtype)

    def forward(self, x: Tensor) -> Tensor:
        return prelu(x, self._params["slope"])

    __call__ = forward


class Mlp(Module):
    """Two linear layers with a PReLU between; optionally PReLU at the end."""

    def __init__(self, d_in: int, d_hidden: int, d_out: int, final_activation: bool = True):
        self.fc1 = Linear(d_in, d_hidden)
        self.act1 = PRelu()
        self.fc2 = Linear(d_hidden, d_out)
        self.act2 = PRelu() if final_activation else None

    def forward(self, x: Tensor) -> Tensor:
        h = self.fc2(self.act1(self.fc1(x)))
        return self.act2(h) if self.act2 is not None else h

    __call__ = forward


def relation_coefficients(graph, use_weights: bool = False):
    """Per-relation aggregation operators with coefficient
    w_ij / |in-neighbors of dst| on each edge.

    The normalizer is the in-degree count under that relation, also when
    explicit edge weights are enabled. Each value is a (matrix, transpose)
    pair of sparse operators consumed by ``spmm``.
    """
    from scipy.sparse import csr_matrix

    n = graph.num_nodes
    out = {}
    for rel, edges in graph.edges.items():
        if len(edges) == 0:
            continue
        src, dst = edges[:, 0], edges[:, 1]
        indeg = np.bincount(dst, minlength=n).astype(np.float64)
        w = np.ones(len(edges))
        if use_weights:
            if graph.weights is None or rel not in graph.weights:
                raise ValueError(f"edge weights requested but absent for {rel.name}")
            w = graph.weights[rel]
        a = csr_matrix((w / indeg[dst], (dst, src)), shape=(n, n))
        out[rel] = (a, a.T.tocsr())
    return out


class RgcnLayer(Module):
    """Relational graph convolution: normalized per-relation neighbor
    aggregation plus a self-connection, followed by PReLU."""

    def __init__(self, d_in: int, d_out: int, num_relations: int = 5):
        self.rel_weights = [LinearNoBias(d_in, d_out) for _ in range(num_relations)]
        self.self_weight = LinearNoBias(d_in, d_out)
        self.act = PRelu()
        self.num_relations = num_relations

    def forward(self, h: Tensor, coeffs: dict) -> Tensor:
        if h.data.ndim != 2:
            raise ShapeMismatch("node features must be 2-D")
        n = h.data.shape[0]
        out = self.self_weight(h)
        for rel, op in coeffs.items():
            if isinstance(op, tuple) and len(op) == 3:  # raw (src, dst, coeff)
                agg = aggregate(h, *op, n)
            else:
                agg = spmm(op, h)
            out = out + self.rel_weights[int(rel) % self.num_relations](agg)
        return self.act(out)

    __call__ = forward


class LinearNoBias(Module):
    def __init__(self, d_in: int, d_out: int):
        self._params = {"weight": _param((d_in, d_out))}

    @property
    def weight(self):
        return self._params["weight"]

    def forward(self, x: Tensor) -> Tensor:
        return x @ self.weight

    __call__ = forward


def _slice_cols(x: Tensor, lo: int, hi: int) -> Tensor:
    out = Tensor(x.data[:, lo:hi])
    out._parents = (x,)

    def bwd(g):
        acc = np.zeros_like(x.data)
        acc[:, lo:hi] = g
        x._accumulate(acc)

    out._backward = bwd
    return out


class LstmCell(Module):
    """Standard LSTM cell, gate order (input, forget, candidate, output).
    Forget-gate bias is initialized to 1."""

    def __init__(self, d_x: int, d_h: int):
        self.d_h = d_h
        self._params = {
            "w_x": _param((d_x, 4 * d_h)),
            "w_h": _param((d_h, 4 * d_h)),
            "bias": _param((4 * d_h,)),
        }

    def _post_init(self):
        b = self._params["bias"]
        b.data[:] = 0.0
        b.data[self.d_h:2 * self.d_h] = 1.0

    def forward(self, x: Tensor, h_prev: Tensor, c_prev: Tensor):
        if x.data.shape[1] != self._params["w_x"].data.shape[0]:
            raise ShapeMismatch("lstm input width mismatch")
        z = x @ self._params["w_x"] + h_prev @ self._params["w_h"] + self._params["bias"]
        d = self.d_h
        i = sigmoid(_slice_cols(z, 0, d))
        f = sigmoid(_slice_cols(z, d, 2 * d))
        g = tanh(_slice_cols(z, 2 * d, 3 * d))
        o = sigmoid(_slice_cols(z, 3 * d, 4 * d))
        c = f * c_prev + i * g
        h = o * tanh(c)
        return h, c

    __call__ = forward


def masked_mse(pred: Tensor, target: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean squared error over unmasked rows only. Masked rows are zeroed
    before squaring, so their target values can never influence the loss or
    its gradients."""
    if pred.data.shape != target.shape:
        raise ShapeMismatch(f"pred {pred.data.shape} vs target {target.shape}")
    m = mask.astype(pred.data.dtype)[:, None]
    diff = (pred - Tensor(target * m)) * Tensor(m)
    n_valid = float(mask.sum()) * target.shape[1]
    return (diff * diff).sum() * (1.0 / n_valid)
