"""
Arrival-time error metrics, pooled over all samples and broken down per horizon step
"""
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np

from nsatp.exceptions import ShapeError


@dataclass
class HorizonMetrics:
    step: int
    rmse_s: float
    mae_s: float
    mape_pct: float


@dataclass
class MetricsReport:
    rmse_s: float
    mae_s: float
    mape_pct: float
    n_samples: int = 0
    per_horizon: List[HorizonMetrics] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, json_data: dict) -> 'MetricsReport':
        json_data = dict(json_data)
        json_data["per_horizon"] = [HorizonMetrics(**h) for h in json_data.get("per_horizon", [])]
        return cls(**json_data)


def metrics(pred_arrivals, true_arrivals) -> MetricsReport:
    """
    RMSE and MAE in seconds and MAPE in percent

    Args:
        pred_arrivals: N_f, or n_samples x N_f, predicted arrival times
        true_arrivals: same shape, true arrival times (seconds since service midnight)
    """
    pred = np.asarray(pred_arrivals, dtype=np.float64)
    truth = np.asarray(true_arrivals, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ShapeError(f"shape: prediction {pred.shape} vs truth {truth.shape}")
    if pred.size == 0:
        raise ValueError("no predictions to score")
    if np.any(truth == 0.0):
        raise ValueError("MAPE undefined at zero")
    pred, truth = np.atleast_2d(pred), np.atleast_2d(truth)
    error = pred - truth
    relative = np.abs(error) / np.abs(truth)

    per_horizon = [
        HorizonMetrics(step=h + 1, rmse_s=float(np.sqrt(np.mean(error[:, h] ** 2))),
                       mae_s=float(np.mean(np.abs(error[:, h]))), mape_pct=float(100.0 * np.mean(relative[:, h])))
        for h in range(error.shape[1])
    ]
    return MetricsReport(rmse_s=float(np.sqrt(np.mean(error ** 2))), mae_s=float(np.mean(np.abs(error))),
                         mape_pct=float(100.0 * np.mean(relative)), n_samples=error.shape[0], per_horizon=per_horizon)
