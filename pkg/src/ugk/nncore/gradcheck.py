"""Central-difference verification of the backward pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GradcheckReport:
    max_rel_err: float
    worst: str
    checked: int

    @property
    def ok(self) -> bool:
        return np.isfinite(self.max_rel_err)


def gradcheck(loss_fn, named_tensors, step: float = 1e-5) -> GradcheckReport:
    """Compare analytic gradients of a scalar loss against central finite
    differences over every element of the given tensors (f64 only).

    loss_fn rebuilds the computation and returns a scalar Tensor; the
    tensors it closes over are perturbed in place.
    """
    for name, t in named_tensors:
        if t.data.dtype != np.float64:
            raise ValueError(f"gradcheck requires float64, {name} is {t.data.dtype}")
        t.requires_grad = True
        t.zero_grad()

    out = loss_fn()
    out.backward()
    analytic = {name: t.grad.copy() for name, t in named_tensors}

    worst = ""
    max_rel = 0.0
    checked = 0
    for name, t in named_tensors:
        flat = t.data.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            f_plus = float(loss_fn().data)
            flat[i] = orig - step
            f_minus = float(loss_fn().data)
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            scale = max(abs(a_flat[i]), abs(numeric), 1.0)
            rel = abs(a_flat[i] - numeric) / scale
            checked += 1
            if rel > max_rel:
                max_rel = rel
                worst = f"{name}[{i}]"
    return GradcheckReport(max_rel_err=max_rel, worst=worst, checked=checked)
