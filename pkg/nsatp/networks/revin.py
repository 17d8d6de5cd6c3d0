"""
Reversible instance normalization: series stationarization followed by a learnable per-feature
affine map, undone on the predicted delays before de-normalization
"""
from typing import Tuple

import torch
import torch.nn as nn

from nsatp.autodiff.init import make_parameter
from nsatp.featurizers.stationarization import StationarizationStats, normalize
from nsatp.transit.sample import DELAY_CHANNEL, N_FEATURES


class RevIN(nn.Module):
    def __init__(self, n_features: int = N_FEATURES, channel: int = DELAY_CHANNEL):
        super().__init__()
        self.gamma = make_parameter(n_features, init="ones")
        self.beta = make_parameter(n_features, init="zeros")
        self.channel = channel

    def affine(self, normalized: torch.Tensor) -> torch.Tensor:
        return normalized * self.gamma + self.beta

    def restore(self, pred_norm: torch.Tensor) -> torch.Tensor:
        """
        Inverse affine map for predictions of the delay channel, (pred - beta) / gamma
        """
        return (pred_norm - self.beta[self.channel]) / self.gamma[self.channel]

    def forward(self, past: torch.Tensor) -> Tuple[torch.Tensor, StationarizationStats]:
        normalized, stats = normalize(past)
        return self.affine(normalized), stats


def revin_variant(past: torch.Tensor, revin: RevIN = None) -> Tuple[torch.Tensor, StationarizationStats]:
    """
    Instance normalization with an optional learnable affine restore; without ``revin`` this is plain series
    stationarization
    """
    if revin is None:
        return normalize(past)
    return revin(past)
