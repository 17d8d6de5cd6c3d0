"""
Shared pipeline of the learned arrival predictors:

    stationarize -> estimate compensation -> conv1d embedding -> backbone blocks
    -> linear projection -> last N_f positions -> de-normalize delays -> add schedule

Subclasses only provide the backbone.
"""
import json
from dataclasses import asdict, dataclass, field, fields
from typing import List, Tuple

import numpy as np
import torch
import torch.nn as nn

from nsatp.autodiff.ops import DTYPE, check_finite
from nsatp.exceptions import ConfigError, DivergenceError, ShapeError
from nsatp.featurizers.stationarization import StationarizationStats, apply_stats, denormalize_delay, normalize
from nsatp.networks.layers import ConvEmbedding, Linear
from nsatp.networks.revin import RevIN
from nsatp.transit.sample import DELAY_CHANNEL, N_CONTEXT, N_FEATURES, REFERENCE_SCALES, TemporalSample


@dataclass
class BackboneConfig:
    n_past: int = 10
    n_future: int = 5
    d_model: int = 16
    n_blocks: int = 2
    k: int = 3
    mlp_hidden: int = 128
    compensation: bool = True
    stationarize: bool = True
    revin: bool = False
    seed: int = 0
    # per-feature scale used in place of the window statistics when stationarize is off
    global_scale: List[float] = field(default_factory=lambda: REFERENCE_SCALES.tolist())

    @property
    def seq_len(self) -> int:
        return self.n_past + self.n_future

    def validate(self) -> None:
        for name in ("n_past", "n_future", "d_model", "n_blocks", "k", "mlp_hidden"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.k < self.seq_len / 2:
            raise ConfigError(f"k={self.k} needs k < T/2 with T={self.seq_len}")
        if len(self.global_scale) != N_FEATURES or min(self.global_scale) <= 0:
            raise ConfigError(f"global_scale needs {N_FEATURES} positive entries")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, json_data: dict):
        names = {f.name for f in fields(cls)}
        unknown = set(json_data) - names
        if unknown:
            raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
        config = cls(**json_data)
        config.validate()
        return config

    def __str__(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def as_batch(batch: dict) -> Tuple[dict, bool]:
    """
    Adds a batch axis to the tensors of a single sample
    """
    if batch["past_features"].dim() == 2:
        return {name: value.unsqueeze(0) for name, value in batch.items() if isinstance(value, torch.Tensor)}, True
    return batch, False


def normalized_delay_target(batch: dict, stats: StationarizationStats) -> torch.Tensor:
    """
    Future delays on the scale of the window's own delay statistics, the training target
    """
    mu, sigma = stats.mu[..., DELAY_CHANNEL, None], stats.sigma[..., DELAY_CHANNEL, None]
    return (batch["future_delay_truth"] - mu) / sigma


class Predictor(nn.Module):
    """
    Anything that maps a batch of samples to delays and arrival times
    """

    def predict(self, sample: TemporalSample) -> np.ndarray:
        with torch.no_grad():
            out = self(sample.to_tensors())
        return out["arrival"].numpy()


class ArrivalPredictor(Predictor):
    def __init__(self, config: BackboneConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.embedding = ConvEmbedding(N_FEATURES + N_CONTEXT, config.d_model, kernel_size=3)
        self.projection = Linear(config.d_model, 1)
        self.revin = RevIN() if config.revin else None
        self.register_buffer("global_scale", torch.tensor(config.global_scale, dtype=DTYPE))

    def stationarize(self, raw_past: torch.Tensor) -> Tuple[torch.Tensor, StationarizationStats]:
        if self.config.stationarize:
            return normalize(raw_past)
        lead = raw_past.shape[:-2]
        stats = StationarizationStats(torch.zeros(*lead, N_FEATURES, dtype=DTYPE),
                                      self.global_scale.expand(*lead, N_FEATURES))
        return apply_stats(raw_past, stats), stats

    def embed(self, normalized_past: torch.Tensor, context: torch.Tensor) -> torch.Tensor:
        """
        Args:
            normalized_past: ... x N_p x C stationarized window
            context: ... x T x N_c binary context over past and future stops

        Returns:
            embedded: ... x T x d_model, future feature rows being zero placeholders
        """
        n_future = context.shape[-2] - normalized_past.shape[-2]
        if n_future < 0:
            raise ShapeError(f"shape: context {tuple(context.shape)} shorter than window "
                             f"{tuple(normalized_past.shape)}")
        placeholder = torch.zeros(*normalized_past.shape[:-2], n_future, N_FEATURES, dtype=normalized_past.dtype)
        features = torch.cat([normalized_past, placeholder], dim=-2)
        return self.embedding(torch.cat([features, context], dim=-1))

    def backbone(self, x: torch.Tensor, raw_past: torch.Tensor, stats: StationarizationStats) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, batch: dict) -> dict:
        batch, single = as_batch(batch)
        raw_past, context, schedule = batch["past_features"], batch["context"], batch["future_schedule"]
        config = self.config
        if raw_past.shape[-2:] != (config.n_past, N_FEATURES) or schedule.shape[-1] != config.n_future:
            raise ShapeError(f"shape: window {tuple(raw_past.shape)} / horizon {tuple(schedule.shape)} do not match "
                             f"N_p={config.n_past}, N_f={config.n_future}")
        if context.shape[-2:] != (config.seq_len, N_CONTEXT):
            raise ShapeError(f"shape: context {tuple(context.shape)}, expected (..., {config.seq_len}, {N_CONTEXT})")
        check_finite(raw_past, context, schedule)

        normalized, stats = self.stationarize(raw_past)
        if self.revin is not None:
            normalized = self.revin.affine(normalized)
        x = self.backbone(self.embed(normalized, context), raw_past, stats)
        pred_norm = self.projection(x)[..., 0][..., -config.n_future:]
        if self.revin is not None:
            pred_norm = self.revin.restore(pred_norm)
        delay = denormalize_delay(pred_norm, stats)
        arrival = schedule + delay
        if not bool(torch.isfinite(arrival).all()):
            raise DivergenceError("diverged")
        out = {"delay_norm": pred_norm, "delay": delay, "arrival": arrival, "stats": stats}
        if single:
            out = {name: value[0] for name, value in out.items() if name != "stats"}
            out["stats"] = StationarizationStats(stats.mu[0], stats.sigma[0], stats.epsilon)
        return out
