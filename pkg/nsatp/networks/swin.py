"""
Shifted-window attention backbone. Each period-folded grid goes through window self-attention
and shifted-window self-attention, both with de-stationary attention scores. With compensation
on the model is NSATP-2, with compensation off it is the ArrivalNet-2 base model.
"""
import math
from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from nsatp.autodiff.init import seeded_init_
from nsatp.autodiff.ops import check_finite, relu, softmax_rows
from nsatp.exceptions import ConfigError, ShapeError
from nsatp.featurizers.stationarization import StationarizationStats
from nsatp.networks.compensation import SwinCompensation, SwinCompensationNet
from nsatp.networks.layers import LayerNorm, Linear
from nsatp.networks.periodic import periodic_mix
from nsatp.networks.predictor import ArrivalPredictor, BackboneConfig


@dataclass
class SwinModelConfig(BackboneConfig):
    d_k: Optional[int] = None
    window: int = 2
    heads: int = 1
    mlp_ratio: int = 4
    inner_compensation: bool = True
    outer_compensation: bool = True

    @property
    def key_dim(self) -> int:
        return self.d_model if self.d_k is None else self.d_k

    def validate(self) -> None:
        super().validate()
        if not 0 < self.key_dim <= self.d_model:
            raise ConfigError(f"d_k must lie in 1..d_model, got {self.key_dim}")
        if self.window < 2:
            raise ConfigError(f"window must be at least 2, got {self.window}")
        if self.heads <= 0 or self.mlp_ratio <= 0:
            raise ConfigError("heads and mlp_ratio must be positive")
        if self.compensation and not (self.inner_compensation or self.outer_compensation):
            raise ConfigError("compensation needs inner_compensation, outer_compensation or both")


def attention_scores(q: torch.Tensor, k: torch.Tensor, tau1=None, delta1=None) -> torch.Tensor:
    """
    Scaled scores (tau1 * Q K^T + 1 delta1^T) / sqrt(d_k)

    Args:
        q: ... x n x d_k
        k: ... x n x d_k
        tau1: scalar or tensor broadcastable to the leading axes
        delta1: ... x n, one shift per key position
    """
    if q.shape[-1] != k.shape[-1]:
        raise ShapeError(f"shape: queries {tuple(q.shape)} and keys {tuple(k.shape)} differ in d_k")
    check_finite(q, k)
    scores = torch.matmul(q, k.transpose(-1, -2))
    if tau1 is not None:
        scores = torch.as_tensor(tau1, dtype=scores.dtype)[..., None, None] * scores
    if delta1 is not None:
        delta1 = torch.as_tensor(delta1, dtype=scores.dtype)
        if delta1.shape[-1] != k.shape[-2]:
            raise ShapeError(f"shape: delta1 {tuple(delta1.shape)} for {k.shape[-2]} keys")
        scores = scores + delta1[..., None, :]
    return scores / math.sqrt(q.shape[-1])


def destationary_attention(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor, tau1=None,
                           delta1=None) -> torch.Tensor:
    """
    Softmax((tau1 Q' K'^T + 1 delta1^T) / sqrt(d_k)) V'. Without tau1 and delta1 this is plain scaled dot-product
    attention.
    """
    if k.shape[-2] != v.shape[-2]:
        raise ShapeError(f"shape: keys {tuple(k.shape)} and values {tuple(v.shape)} differ in length")
    check_finite(v)
    return torch.matmul(softmax_rows(attention_scores(q, k, tau1, delta1)), v)


def window_partition(x: torch.Tensor, window: int, shift: bool = False) -> torch.Tensor:
    """
    Tiles a ... x f x p x d grid into non-overlapping window x window tiles, row-major, after zero padding both
    grid axes to multiples of the window. With shift the padded grid is first rolled by -(window // 2) on both axes.

    Returns:
        windows: ... x n_windows x window^2 x d
    """
    f, p, d = x.shape[-3:]
    n = x.dim() - 3
    x = F.pad(x, (0, 0, 0, (-p) % window, 0, (-f) % window))
    if shift:
        x = torch.roll(x, shifts=(-(window // 2), -(window // 2)), dims=(-3, -2))
    rows, cols = x.shape[-3] // window, x.shape[-2] // window
    x = x.reshape(*x.shape[:n], rows, window, cols, window, d).transpose(n + 1, n + 2)
    return x.reshape(*x.shape[:n], rows * cols, window * window, d)


def window_combine(windows: torch.Tensor, f: int, p: int, window: int, shift: bool = False) -> torch.Tensor:
    """
    Inverse of window_partition: re-assembles the tiles, undoes the roll and crops the padding
    """
    n = windows.dim() - 3
    d = windows.shape[-1]
    rows, cols = -(-f // window), -(-p // window)
    x = windows.reshape(*windows.shape[:n], rows, cols, window, window, d).transpose(n + 1, n + 2)
    x = x.reshape(*windows.shape[:n], rows * window, cols * window, d)
    if shift:
        x = torch.roll(x, shifts=(window // 2, window // 2), dims=(-3, -2))
    return x[..., :f, :p, :]


class WindowAttention(nn.Module):
    def __init__(self, d_model: int, d_k: int, heads: int):
        super().__init__()
        self.d_k = d_k
        self.heads = heads
        self.query = Linear(d_model, heads * d_k)
        self.key = Linear(d_model, heads * d_k)
        self.value = Linear(d_model, heads * d_k)
        self.output = Linear(heads * d_k, d_model)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        return x.reshape(*x.shape[:-1], self.heads, self.d_k).transpose(-2, -3)

    def forward(self, windows: torch.Tensor, tau1: torch.Tensor = None, delta1: torch.Tensor = None) -> torch.Tensor:
        """
        Args:
            windows: b x n_windows x n x d_model
            tau1: b, or None
            delta1: b x n, or None
        """
        q, k, v = self._split(self.query(windows)), self._split(self.key(windows)), self._split(self.value(windows))
        if tau1 is not None:
            tau1 = tau1[:, None, None]
        if delta1 is not None:
            delta1 = delta1[:, None, None, :]
        out = destationary_attention(q, k, v, tau1, delta1).transpose(-2, -3)
        return self.output(out.reshape(*out.shape[:-2], self.heads * self.d_k))


class FeedForward(nn.Module):
    def __init__(self, d_model: int, hidden: int):
        super().__init__()
        self.fc1 = Linear(d_model, hidden)
        self.fc2 = Linear(hidden, d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc2(relu(self.fc1(x)))


class WindowBlock(nn.Module):
    """
    LN -> (shifted) window attention -> residual -> LN -> MLP -> residual, on a b x f x p x d_model grid
    """

    def __init__(self, config: SwinModelConfig, shift: bool):
        super().__init__()
        self.window = config.window
        self.shift = shift
        self.norm1 = LayerNorm(config.d_model)
        self.attention = WindowAttention(config.d_model, config.key_dim, config.heads)
        self.norm2 = LayerNorm(config.d_model)
        self.mlp = FeedForward(config.d_model, config.mlp_ratio * config.d_model)

    def forward(self, grid: torch.Tensor, tau1: torch.Tensor = None, delta1: torch.Tensor = None) -> torch.Tensor:
        f, p = grid.shape[-3], grid.shape[-2]
        windows = window_partition(self.norm1(grid), self.window, self.shift)
        grid = grid + window_combine(self.attention(windows, tau1, delta1), f, p, self.window, self.shift)
        return grid + self.mlp(self.norm2(grid))


class SwinBlock(nn.Module):
    """
    W-MSA then SW-MSA on every period-folded grid. The sub-block residuals carry the identity path, so the mix of
    the unfolded branches is the block output.
    """

    def __init__(self, config: SwinModelConfig):
        super().__init__()
        self.k = config.k
        self.regular = WindowBlock(config, shift=False)
        self.shifted = WindowBlock(config, shift=True)

    def forward(self, x: torch.Tensor, comp: SwinCompensation = None) -> torch.Tensor:
        def branch(grid, index):
            tau1 = delta1 = None
            if comp is not None and comp.inner:
                tau1, delta1 = comp.tau1[index], comp.delta1[index]
            return self.shifted(self.regular(grid, tau1, delta1), tau1, delta1)

        return periodic_mix(x, self.k, branch)


class SwinArrivalModel(ArrivalPredictor):
    def __init__(self, config: SwinModelConfig):
        super().__init__(config)
        self.blocks = nn.ModuleList([SwinBlock(config) for _ in range(config.n_blocks)])
        self.compensation = None
        if config.compensation:
            self.compensation = SwinCompensationNet(config.n_past, config.window, config.d_model, config.mlp_hidden,
                                                    inner=config.inner_compensation,
                                                    outer=config.outer_compensation)
        seeded_init_(self, config.seed)

    def estimate_compensation(self, raw_past: torch.Tensor, stats: StationarizationStats) -> SwinCompensation:
        if self.compensation is None:
            return SwinCompensation()
        return self.compensation(raw_past, stats)

    def backbone(self, x: torch.Tensor, raw_past: torch.Tensor, stats: StationarizationStats) -> torch.Tensor:
        comp = self.estimate_compensation(raw_past, stats)
        for block in self.blocks:
            x = block(x, comp)
        return comp.apply_outer(x)
