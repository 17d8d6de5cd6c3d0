"""
CNN backbone: L blocks of inception-style 2D convolutions over period-folded sequences. With
compensation on the model is NSATP-1; with compensation off it is the ArrivalNet-1 base model
and shares every backbone weight with NSATP-1 of the same seed.
"""
from dataclasses import dataclass

import torch
import torch.nn as nn

from nsatp.autodiff.init import seeded_init_
from nsatp.exceptions import ConfigError
from nsatp.featurizers.stationarization import StationarizationStats
from nsatp.networks.compensation import CnnCompensation, CompensationFactors
from nsatp.networks.layers import InceptionPair
from nsatp.networks.periodic import periodic_mix
from nsatp.networks.predictor import ArrivalPredictor, BackboneConfig

PLACEMENTS = ("inside_each_block", "after_last_block")


@dataclass
class CnnModelConfig(BackboneConfig):
    n_kernels: int = 6
    placement: str = "after_last_block"

    def validate(self) -> None:
        super().validate()
        if self.n_kernels <= 0:
            raise ConfigError(f"n_kernels must be positive, got {self.n_kernels}")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")


class Cnn2dBlock(nn.Module):
    """
    For each of the top-k periods: fold, two inception layers, unfold. The branches are mixed with softmax
    amplitude weights and added to the input.
    """

    def __init__(self, d_model: int, k: int, n_kernels: int):
        super().__init__()
        self.k = k
        self.inception = InceptionPair(d_model, n_kernels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + periodic_mix(x, self.k, lambda grid, index: self.inception(grid))


class CnnArrivalModel(ArrivalPredictor):
    def __init__(self, config: CnnModelConfig):
        super().__init__(config)
        self.blocks = nn.ModuleList([Cnn2dBlock(config.d_model, config.k, config.n_kernels)
                                     for _ in range(config.n_blocks)])
        self.compensation = None
        if config.compensation:
            self.compensation = CnnCompensation(config.n_past, config.seq_len, config.d_model, config.mlp_hidden)
        seeded_init_(self, config.seed)

    def estimate_compensation(self, raw_past: torch.Tensor, stats: StationarizationStats) -> CompensationFactors:
        if self.compensation is None:
            return CompensationFactors.identity(raw_past.shape[0], self.config.seq_len, self.config.d_model)
        return self.compensation(raw_past, stats)

    def backbone(self, x: torch.Tensor, raw_past: torch.Tensor, stats: StationarizationStats) -> torch.Tensor:
        comp = self.estimate_compensation(raw_past, stats)
        inside = self.config.placement == "inside_each_block"
        for i, block in enumerate(self.blocks):
            x = block(x)
            if inside or i == len(self.blocks) - 1:
                x = comp.apply(x)
        return x
