"""
Non-stationary effect recovery. Small MLPs read the raw window together with the statistics that
series stationarization removed and produce a positive scale (as exp of an unconstrained
output) and a shift that are re-applied inside the backbone. Output layers start at zero, so a
fresh model applies the identity compensation (scale 1, shift 0).
"""
from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn

from nsatp.autodiff.ops import check_finite
from nsatp.featurizers.stationarization import StationarizationStats
from nsatp.networks.layers import Mlp
from nsatp.transit.sample import N_FEATURES, REFERENCE_SCALES


def compensation_inputs(raw_past: torch.Tensor, statistic: torch.Tensor) -> torch.Tensor:
    """
    Flattened raw window and one per-feature statistic, both in reference units

    Args:
        raw_past: ... x N_p x C
        statistic: ... x C

    Returns:
        inputs: ... x (N_p * C + C)
    """
    scales = torch.as_tensor(REFERENCE_SCALES, dtype=raw_past.dtype)
    return torch.cat([(raw_past / scales).flatten(-2), statistic / scales], dim=-1)


@dataclass
class CompensationFactors:
    tau: torch.Tensor
    delta: torch.Tensor

    def apply(self, x: torch.Tensor) -> torch.Tensor:
        """
        tau * X + delta, tau per sample (...) and delta per sample (... x T x d_model)
        """
        return self.tau[..., None, None] * x + self.delta

    @classmethod
    def identity(cls, batch: int, length: int, d_model: int) -> 'CompensationFactors':
        return cls(torch.ones(batch, dtype=torch.float64), torch.zeros(batch, length, d_model, dtype=torch.float64))


class CnnCompensation(nn.Module):
    """
    Estimates tau_CNN from (raw window, sigma) and Delta_CNN (T x d_model) from (raw window, mu)

    Args:
        n_past: observed window length
        seq_len: T = n_past + n_future
        d_model: embedding width
        hidden: width of the two hidden layers
    """

    def __init__(self, n_past: int, seq_len: int, d_model: int, hidden: int = 128):
        super().__init__()
        self.seq_len = seq_len
        self.d_model = d_model
        input_size = n_past * N_FEATURES + N_FEATURES
        self.log_tau = Mlp(input_size, [hidden, hidden, 1], zero_output=True)
        self.delta = Mlp(input_size, [hidden, hidden, seq_len * d_model], zero_output=True)

    def forward(self, raw_past: torch.Tensor, stats: StationarizationStats) -> CompensationFactors:
        check_finite(raw_past, stats.mu, stats.sigma)
        log_tau = self.log_tau(compensation_inputs(raw_past, stats.sigma))[..., 0]
        delta = self.delta(compensation_inputs(raw_past, stats.mu))
        return CompensationFactors(torch.exp(log_tau), delta.reshape(*delta.shape[:-1], self.seq_len, self.d_model))


@dataclass
class SwinCompensation:
    """
    Factors of the shifted-window backbone. tau1 and delta1 (one entry per window position) correct the attention
    scores, tau2 and delta2 (one entry per channel) rescale the backbone output. Unused factors are None.
    """
    tau1: Optional[torch.Tensor] = None
    delta1: Optional[torch.Tensor] = None
    tau2: Optional[torch.Tensor] = None
    delta2: Optional[torch.Tensor] = None

    @property
    def inner(self) -> bool:
        return self.tau1 is not None

    @property
    def outer(self) -> bool:
        return self.tau2 is not None

    def select(self, index: torch.Tensor) -> 'SwinCompensation':
        return SwinCompensation(*(None if factor is None else factor[index]
                                  for factor in (self.tau1, self.delta1, self.tau2, self.delta2)))

    def apply_outer(self, x: torch.Tensor) -> torch.Tensor:
        if not self.outer:
            return x
        return self.tau2[..., None, None] * x + self.delta2[..., None, :]


class SwinCompensationNet(nn.Module):
    def __init__(self, n_past: int, window: int, d_model: int, hidden: int = 128, inner: bool = True,
                 outer: bool = True):
        super().__init__()
        input_size = n_past * N_FEATURES + N_FEATURES
        if inner:
            self.log_tau1 = Mlp(input_size, [hidden, hidden, 1], zero_output=True)
            self.delta1 = Mlp(input_size, [hidden, hidden, window * window], zero_output=True)
        if outer:
            self.log_tau2 = Mlp(input_size, [hidden, hidden, 1], zero_output=True)
            self.delta2 = Mlp(input_size, [hidden, hidden, d_model], zero_output=True)
        self.inner = inner
        self.outer = outer

    def forward(self, raw_past: torch.Tensor, stats: StationarizationStats) -> SwinCompensation:
        check_finite(raw_past, stats.mu, stats.sigma)
        with_sigma = compensation_inputs(raw_past, stats.sigma)
        with_mu = compensation_inputs(raw_past, stats.mu)
        comp = SwinCompensation()
        if self.inner:
            comp.tau1 = torch.exp(self.log_tau1(with_sigma)[..., 0])
            comp.delta1 = self.delta1(with_mu)
        if self.outer:
            comp.tau2 = torch.exp(self.log_tau2(with_sigma)[..., 0])
            comp.delta2 = self.delta2(with_mu)
        return comp
