"""Evaluation metrics for multi-step per-node field predictions.

Per-hour R² is computed about the global (all-hours) truth mean so that the
sum-of-squares decomposition pools exactly: the error-count-weighted
combination of per-hour scores reproduces the overall R².
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, ShapeMismatch


@dataclass
class HourScores:
    mae: float
    rmse: float
    r2: float


@dataclass
class MetricsReport:
    mae: float
    rmse: float
    r2: float
    per_hour: list  # one HourScores per prediction step
    n_valid: int

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "r2": self.r2,
            "n_valid": self.n_valid,
            "per_hour": [{"mae": h.mae, "rmse": h.rmse, "r2": h.r2}
                         for h in self.per_hour],
        }


def compute_metrics(pred: np.ndarray, truth: np.ndarray,
                    valid_mask: np.ndarray | None = None) -> MetricsReport:
    """Score a (|V|, T) prediction against a (|V|, T) truth array.

    valid_mask is a per-node boolean vector; invalid rows are excluded
    everywhere. Raises DegenerateVariance when the retained truth values are
    constant, since R² is undefined there.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 2:
        raise ShapeMismatch(f"pred {pred.shape} vs truth {truth.shape}")
    if valid_mask is None:
        valid_mask = np.ones(pred.shape[0], dtype=bool)
    p = pred[valid_mask]
    t = truth[valid_mask]
    if p.size == 0:
        raise DegenerateVariance("no valid nodes to score")

    gmean = t.mean()
    sstot_all = float(((t - gmean) ** 2).sum())
    if sstot_all == 0.0:
        raise DegenerateVariance("truth values are constant; R² is undefined")

    err = p - t
    sse_all = float((err ** 2).sum())
    overall = MetricsReport(
        mae=float(np.abs(err).mean()),
        rmse=float(np.sqrt(sse_all / err.size)),
        r2=1.0 - sse_all / sstot_all,
        per_hour=[],
        n_valid=int(valid_mask.sum()),
    )
    for h in range(p.shape[1]):
        e = err[:, h]
        sse = float((e ** 2).sum())
        sstot = float(((t[:, h] - gmean) ** 2).sum())
        overall.per_hour.append(HourScores(
            mae=float(np.abs(e).mean()),
            rmse=float(np.sqrt(sse / e.size)),
            r2=1.0 - sse / sstot if sstot > 0 else float("nan"),
        ))
    return overall
