"""
Series stationarization: every feature of a window is standardized along the temporal axis
with the window's own mean and standard deviation, and predicted delays are mapped back with
the statistics of the delay channel.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import torch

from nsatp.exceptions import ShapeError
from nsatp.transit.sample import DELAY_CHANNEL, N_FEATURES

EPSILON = 1e-5

Array = Union[np.ndarray, torch.Tensor]


@dataclass
class StationarizationStats:
    mu: Array
    sigma: Array
    epsilon: float = EPSILON

    def to_json(self) -> dict:
        return {"mu": np.asarray(self.mu).tolist(), "sigma": np.asarray(self.sigma).tolist(), "epsilon": self.epsilon}


def _as_float64(x: Array) -> Tuple[torch.Tensor, bool]:
    if isinstance(x, torch.Tensor):
        return x.to(torch.float64), False
    return torch.as_tensor(np.asarray(x, dtype=np.float64)), True


def _to_numpy(x: torch.Tensor) -> np.ndarray:
    return x.detach().cpu().numpy()


def normalize(past: Array, epsilon: float = EPSILON) -> Tuple[Array, StationarizationStats]:
    """
    Standardizes each column of a window (or of every window in a batch) along time

    Args:
        past: ... x N_p x C raw window, numpy array or torch tensor
        epsilon: floor applied to the standard deviation of constant columns

    Returns:
        normalized: window with zero-mean, unit-std columns, same type as ``past``
        stats: per-column mean and floored population standard deviation
    """
    x, from_numpy = _as_float64(past)
    if x.numel() == 0:
        raise ValueError("empty window")
    if x.dim() < 2:
        raise ShapeError(f"shape: a window needs a time and a feature axis, got {tuple(x.shape)}")
    mu = x.mean(dim=-2, keepdim=True)
    centered = x - mu
    sigma = torch.sqrt(torch.mean(centered * centered, dim=-2, keepdim=True)).clamp_min(epsilon)
    normalized = centered / sigma
    mu, sigma = mu.squeeze(-2), sigma.squeeze(-2)
    if from_numpy:
        return _to_numpy(normalized), StationarizationStats(_to_numpy(mu), _to_numpy(sigma), epsilon)
    return normalized, StationarizationStats(mu, sigma, epsilon)


def apply_stats(past: Array, stats: StationarizationStats) -> Array:
    """
    Normalizes a window with given statistics instead of its own
    """
    mu, sigma = stats.mu, stats.sigma
    if isinstance(past, torch.Tensor):
        return (past - mu.unsqueeze(-2)) / sigma.unsqueeze(-2)
    return (np.asarray(past, dtype=np.float64) - np.expand_dims(mu, -2)) / np.expand_dims(sigma, -2)


def denormalize_delay(pred_norm: Array, stats: StationarizationStats, channel: int = DELAY_CHANNEL) -> Array:
    """
    Maps predicted normalized delays back to seconds: sigma[T_d] * pred + mu[T_d]

    Args:
        pred_norm: ... x N_f normalized delay predictions
        stats: statistics of the same window(s), ... x C
        channel: index of the delay column in the feature schema

    Returns:
        delays: ... x N_f delays in seconds
    """
    mu, sigma = stats.mu, stats.sigma
    if mu.shape[-1] != N_FEATURES or sigma.shape != mu.shape:
        raise ShapeError(f"shape: statistics {tuple(mu.shape)} / {tuple(sigma.shape)} do not match the feature schema")
    if pred_norm.ndim < 1 or tuple(pred_norm.shape[:-1]) != tuple(mu.shape[:-1]):
        raise ShapeError(f"shape: predictions {tuple(pred_norm.shape)} do not match statistics {tuple(mu.shape)}")
    return sigma[..., channel, None] * pred_norm + mu[..., channel, None]


def collision_score(a: Array, b: Array) -> float:
    """
    Frobenius distance between two windows after stationarization. Zero means the two raw
    windows become indistinguishable to the predictor.
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape: cannot compare windows {a.shape} and {b.shape}")
    norm_a, _ = normalize(a)
    norm_b, _ = normalize(b)
    return float(np.linalg.norm(norm_a - norm_b))


def stationarize_windowwise(series: Array, window: int, epsilon: float = EPSILON) -> np.ndarray:
    """
    Standardizes consecutive blocks of ``window`` points of a 1D series independently, the
    way a predictor sees a long sequence one stationarized window at a time.
    """
    series = np.asarray(series, dtype=np.float64)
    if window < 1:
        raise ValueError("window must be positive")
    blocks = [series[start:start + window, None] for start in range(0, len(series), window)]
    return np.concatenate([normalize(block, epsilon)[0][:, 0] for block in blocks])
