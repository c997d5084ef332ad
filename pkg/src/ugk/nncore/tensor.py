"""Reverse-mode automatic differentiation on dense numpy arrays.

A Tensor wraps a float array and records the operations producing it;
``backward()`` walks the tape in reverse topological order. Only the ops the
model needs are implemented. All math stays in the array's dtype (float64
for tests and gradient checks, float32 optionally at runtime).
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64 if not isinstance(data, np.ndarray) else data.dtype)
        if self.data.dtype not in (np.float64, np.float32):
            self.data = self.data.astype(np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # -- graph plumbing ----------------------------------------------------

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0.0

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ShapeMismatch("backward() without a gradient needs a scalar")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def _needs_grad(self, *parents):
        return any(p.requires_grad or p._parents for p in parents)

    # -- ops -----------------------------------------------------------------

    @staticmethod
    def _lift(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))

    def __add__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data + other.data)
        out._parents = (self, other)

        def bwd(g):
            _unbroadcast_into(self, g)
            _unbroadcast_into(other, g)

        out._backward = bwd
        return out

    __radd__ = __add__

    def __sub__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data - other.data)
        out._parents = (self, other)

        def bwd(g):
            _unbroadcast_into(self, g)
            _unbroadcast_into(other, -g)

        out._backward = bwd
        return out

    def __mul__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data * other.data)
        out._parents = (self, other)

        def bwd(g):
            _unbroadcast_into(self, g * other.data)
            _unbroadcast_into(other, g * self.data)

        out._backward = bwd
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def matmul(self, other: "Tensor") -> "Tensor":
        other = Tensor._lift(other)
        if self.data.shape[-1] != other.data.shape[0]:
            raise ShapeMismatch(
                f"matmul: {self.data.shape} @ {other.data.shape}")
        out = Tensor(self.data @ other.data)
        out._parents = (self, other)

        def bwd(g):
            self._accumulate(g @ other.data.T)
            other._accumulate(self.data.T @ g)

        out._backward = bwd
        return out

    __matmul__ = matmul

    def sum(self) -> "Tensor":
        out = Tensor(np.asarray(self.data.sum()))
        out._parents = (self,)

        def bwd(g):
            self._accumulate(np.broadcast_to(g, self.data.shape).copy())

        out._backward = bwd
        return out

    def mean(self) -> "Tensor":
        return self.sum() * (1.0 / self.data.size)


def _unbroadcast_into(t: Tensor, g: np.ndarray):
    """Accumulate g into t.grad, summing over broadcast dimensions."""
    data = t.data
    while g.ndim > data.ndim:
        g = g.sum(axis=0)
    for ax, n in enumerate(data.shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    t._accumulate(g)


def sigmoid(x: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-x.data))
    out = Tensor(s)
    out._parents = (x,)
    out._backward = lambda g: x._accumulate(g * s * (1.0 - s))
    return out


def tanh(x: Tensor) -> Tensor:
    th = np.tanh(x.data)
    out = Tensor(th)
    out._parents = (x,)
    out._backward = lambda g: x._accumulate(g * (1.0 - th * th))
    return out


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """PReLU with a single learnable slope (scalar tensor)."""
    a = slope.data.reshape(())
    pos = x.data > 0
    out = Tensor(np.where(pos, x.data, a * x.data))
    out._parents = (x, slope)

    def bwd(g):
        x._accumulate(np.where(pos, g, a * g))
        slope._accumulate(np.asarray((g * np.where(pos, 0.0, x.data)).sum())
                          .reshape(slope.data.shape))

    out._backward = bwd
    return out


def concat(tensors: list, axis: int = 1) -> Tensor:
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    out._parents = tuple(tensors)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            t._accumulate(g[tuple(idx)])

    out._backward = bwd
    return out


def gather_rows(x: Tensor, idx: np.ndarray) -> Tensor:
    out = Tensor(x.data[idx])
    out._parents = (x,)

    def bwd(g):
        acc = np.zeros_like(x.data)
        np.add.at(acc, idx, g)
        x._accumulate(acc)

    out._backward = bwd
    return out


def spmm(mats, x: Tensor) -> Tensor:
    """Sparse-matrix / dense-features product; mats is (A, A_transpose) with
    A[i, j] holding the coefficient of the edge j -> i."""
    a, at = mats
    out = Tensor(a @ x.data)
    out._parents = (x,)
    out._backward = lambda g: x._accumulate(at @ g)
    return out


def aggregate(x: Tensor, src: np.ndarray, dst: np.ndarray, coeff: np.ndarray,
              num_nodes: int) -> Tensor:
    """Edge-wise message aggregation: out[i] = sum over edges e with
    dst[e] == i of coeff[e] * x[src[e]]."""
    msg = coeff[:, None] * x.data[src]
    acc = np.zeros((num_nodes, x.data.shape[1]), dtype=x.data.dtype)
    np.add.at(acc, dst, msg)
    out = Tensor(acc)
    out._parents = (x,)

    def bwd(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, src, coeff[:, None] * g[dst])
        x._accumulate(gx)

    out._backward = bwd
    return out
