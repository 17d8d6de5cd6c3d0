"""
Scoring a predictor on one split: arrival-time metrics plus the median ADF ratio of the
per-sample full delay sequences (observed history followed by the predicted horizon).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from torch.utils.data import DataLoader

from nsatp.autodiff.checkpoint import load_checkpoint
from nsatp.exceptions import CollinearError, ConfigError
from nsatp.harness.config import ExperimentConfig, build_model
from nsatp.networks.predictor import Predictor
from nsatp.stats.adf import adf_ratio
from nsatp.stats.metrics import MetricsReport, metrics
from nsatp.transit.dataset import Dataset
from nsatp.transit.sample import DELAY_CHANNEL

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    metrics: MetricsReport
    adf_ratio: Optional[float]
    adf_scored: int
    adf_skipped: int


def predict_split(model: Predictor, dataset: Dataset, batch_size: int = 256):
    """
    Returns:
        pred_delays, pred_arrivals, true_delays, true_arrivals, past_delays: numpy arrays over the dataset
    """
    loader = DataLoader(dataset, batch_size=batch_size, shuffle=False)
    parts = {name: [] for name in ("pred_delay", "pred_arrival", "true_delay", "true_arrival", "past_delay")}
    model.eval()
    with torch.no_grad():
        for batch in loader:
            out = model(batch)
            parts["pred_delay"].append(out["delay"].numpy())
            parts["pred_arrival"].append(out["arrival"].numpy())
            parts["true_delay"].append(batch["future_delay_truth"].numpy())
            parts["true_arrival"].append(batch["future_arrival_truth"].numpy())
            parts["past_delay"].append(batch["past_features"][..., DELAY_CHANNEL].numpy())
    return tuple(np.concatenate(parts[name]) for name in parts)


def median_adf_ratio(past_delays: np.ndarray, pred_delays: np.ndarray, true_delays: np.ndarray,
                     max_samples: int = None, min_length: int = 10):
    """
    Median over samples of adf(history + predicted) / adf(history + true). Samples whose regression is collinear or
    whose true statistic is too close to zero are skipped and counted.
    """
    ratios, skipped = [], 0
    n = len(past_delays) if max_samples is None else min(max_samples, len(past_delays))
    for i in range(n):
        pred_sequence = np.concatenate([past_delays[i], pred_delays[i]])
        true_sequence = np.concatenate([past_delays[i], true_delays[i]])
        try:
            ratios.append(adf_ratio(pred_sequence, true_sequence, min_length=min_length))
        except (CollinearError, ValueError):
            skipped += 1
    if skipped:
        logger.debug("ADF ratio skipped %d of %d samples", skipped, n)
    return (float(np.median(ratios)) if ratios else None), len(ratios), skipped


def evaluate(model: Predictor, dataset: Dataset, n_future: int = None, split: Optional[str] = "test",
             adf_samples: int = None, adf_min_length: int = 10) -> Evaluation:
    """
    Args:
        model: trained model or baseline
        dataset: dataset holding the split
        n_future: expected horizon; a mismatch with the dataset or the model is an error
        split: split to score, None for every sample
    """
    model_horizon = getattr(getattr(model, "config", None), "n_future", None)
    for horizon in (n_future, model_horizon):
        if horizon is not None and horizon != dataset.n_future:
            raise ConfigError(f"horizon mismatch: expected N_f={horizon}, dataset has N_f={dataset.n_future}")
    part = dataset.split(split) if split is not None else dataset
    if len(part) == 0:
        raise ValueError(f"split {split!r} is empty")
    pred_delay, pred_arrival, true_delay, true_arrival, past_delay = predict_split(model, part)
    report = metrics(pred_arrival, true_arrival)
    ratio, scored, skipped = median_adf_ratio(past_delay, pred_delay, true_delay, adf_samples, adf_min_length)
    logger.info("Evaluated %d samples: RMSE %.3f s, MAE %.3f s, ADF ratio %s", report.n_samples, report.rmse_s,
                report.mae_s, ratio)
    return Evaluation(report, ratio, scored, skipped)


def load_model(filename: str) -> Predictor:
    """
    Rebuilds a model from a checkpoint written by the trainer
    """
    config_json, state_dict, extra = load_checkpoint(filename)
    config = ExperimentConfig.from_json(config_json)
    model = build_model(config, extra.get("global_scale"))
    model.load_state_dict(state_dict)
    return model


def evaluate_checkpoint(filename: str, dataset: Dataset, n_future: int = None, **kwargs) -> Evaluation:
    return evaluate(load_model(filename), dataset, n_future=n_future, **kwargs)
