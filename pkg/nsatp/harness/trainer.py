"""
Mini-batch training of the arrival predictors on normalized delays, with early stopping on the
validation loss and a run report at the end.
"""
import copy
import logging
import os
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import torch
import torch.nn as nn
import torch.optim as opt
from torch.utils.data import DataLoader

from nsatp.autodiff.checkpoint import save_checkpoint
from nsatp.autodiff.ops import mse_loss
from nsatp.exceptions import DivergenceError
from nsatp.featurizers.stationarization import EPSILON
from nsatp.harness.config import ExperimentConfig, build_model, config_hash
from nsatp.harness.evaluate import evaluate
from nsatp.harness.report import RunReport, provenance
from nsatp.networks.predictor import ArrivalPredictor, Predictor, normalized_delay_target
from nsatp.transit.dataset import Dataset

logger = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    best_epoch: Optional[int] = None
    stopped_early: bool = False


class ArrivalTrainer(nn.Module):
    """
    Trainer for arrival predictors. Holds the model and its Adam optimizer; the loss is the MSE between predicted
    and true future delays, both on the window's normalized scale.

    Args:
        model: predictor with learnable parameters
        hyper_params: dict with learning_rate, betas and weight_decay
    """

    def __init__(self, model: ArrivalPredictor, hyper_params: dict):
        super().__init__()
        self.device = torch.device("cpu")
        self.model = model
        self.learn_rate = hyper_params['learning_rate']
        self.betas = tuple(hyper_params['betas'])
        self.weight_decay = hyper_params['weight_decay']
        self.optimizer = opt.Adam(self.model.parameters(), lr=self.learn_rate, betas=self.betas,
                                  weight_decay=self.weight_decay)

    def batch_loss(self, batch: dict) -> torch.Tensor:
        out = self.model(batch)
        return mse_loss(out["delay_norm"], normalized_delay_target(batch, out["stats"]))

    def mean_loss(self, loader: DataLoader) -> float:
        self.model.eval()
        total, count = 0.0, 0
        with torch.no_grad():
            for batch in loader:
                n = batch["past_features"].shape[0]
                total += float(self.batch_loss(batch)) * n
                count += n
        return total / count

    def train_epoch(self, loader: DataLoader) -> float:
        self.model.train()
        total, count = 0.0, 0
        for batch in loader:
            self.optimizer.zero_grad()
            loss = self.batch_loss(batch)
            if not bool(torch.isfinite(loss)):
                raise DivergenceError("diverged")
            loss.backward()
            self.optimizer.step()
            n = batch["past_features"].shape[0]
            total += float(loss) * n
            count += n
        return total / count

    def fit(self, train: Dataset, val: Dataset, epochs: int, batch_size: int, patience: int = 5,
            seed: int = 0) -> TrainingHistory:
        """
        Trains for up to ``epochs`` epochs and restores the parameters of the best validation epoch. Entry 0 of both
        loss curves is the loss of the untrained model.
        """
        generator = torch.Generator().manual_seed(seed)
        train_loader = DataLoader(train, batch_size=batch_size, shuffle=True, generator=generator)
        train_eval_loader = DataLoader(train, batch_size=batch_size, shuffle=False)
        val_loader = DataLoader(val, batch_size=batch_size, shuffle=False)

        history = TrainingHistory()
        history.train_loss.append(self.mean_loss(train_eval_loader))
        history.val_loss.append(self.mean_loss(val_loader))
        best_loss, best_state, history.best_epoch = history.val_loss[0], copy.deepcopy(self.model.state_dict()), 0
        logger.info("Epoch 0: train %.5f, val %.5f", history.train_loss[0], history.val_loss[0])
        for epoch in range(1, epochs + 1):
            try:
                history.train_loss.append(self.train_epoch(train_loader))
                history.val_loss.append(self.mean_loss(val_loader))
            except DivergenceError as ex:
                logger.error("Training diverged in epoch %d", epoch)
                ex.report = history
                raise
            if not np.isfinite(history.val_loss[-1]):
                logger.error("Validation loss diverged in epoch %d", epoch)
                raise DivergenceError("diverged", report=history)
            logger.info("Epoch %d: train %.5f, val %.5f", epoch, history.train_loss[-1], history.val_loss[-1])
            if history.val_loss[-1] < best_loss:
                best_loss, best_state, history.best_epoch = history.val_loss[-1], \
                    copy.deepcopy(self.model.state_dict()), epoch
            elif epoch - history.best_epoch >= patience:
                logger.info("Early stop after epoch %d, best epoch %d", epoch, history.best_epoch)
                history.stopped_early = True
                break
        self.model.load_state_dict(best_state)
        return history


def feature_scale(dataset: Dataset) -> List[float]:
    """
    Per-feature standard deviation of the observed windows, used in place of window statistics when series
    stationarization is switched off
    """
    stacked = np.concatenate([sample.past_features for sample in dataset.samples])
    scale = stacked.std(axis=0)
    return np.where(scale > EPSILON, scale, 1.0).tolist()


def train(config: ExperimentConfig, dataset: Dataset = None, out_dir: str = None) -> Tuple[Predictor, RunReport]:
    """
    Trains the configured model (baselines skip straight to evaluation) and scores it on the test split.
    Writes checkpoint.json and report.json to ``out_dir`` when given.
    """
    config.validate()
    start = time.perf_counter()
    torch.set_num_threads(config.threads)
    torch.manual_seed(config.seed)
    if dataset is None:
        if config.dataset is None:
            raise FileNotFoundError("No dataset given for training")
        dataset = Dataset.from_file(config.dataset)

    report = RunReport(model=config.model, config_hash=config_hash(config), config=config.to_json(),
                       provenance=provenance())
    global_scale = None
    if config.learned and not config.stationarize:
        global_scale = feature_scale(dataset.split("train"))
    model = build_model(config, global_scale)
    if config.learned:
        trainer = ArrivalTrainer(model, {"learning_rate": config.lr, "betas": config.betas,
                                         "weight_decay": config.weight_decay})
        try:
            history = trainer.fit(dataset.split("train"), dataset.split("val"), config.epochs, config.batch_size,
                                  config.patience, config.seed)
        except DivergenceError as ex:
            history = ex.report if isinstance(ex.report, TrainingHistory) else TrainingHistory()
            report.train_loss, report.val_loss, report.diverged = history.train_loss, history.val_loss, True
            report.wall_time_s = time.perf_counter() - start
            if out_dir is not None:
                report.save(os.path.join(out_dir, "report.json"))
            ex.report = report
            raise
        report.train_loss, report.val_loss = history.train_loss, history.val_loss
        report.best_epoch, report.stopped_early = history.best_epoch, history.stopped_early

    evaluation = evaluate(model, dataset, adf_samples=config.adf_samples, adf_min_length=config.adf_min_length)
    report.test, report.adf_ratio = evaluation.metrics, evaluation.adf_ratio
    report.adf_scored, report.adf_skipped = evaluation.adf_scored, evaluation.adf_skipped
    report.wall_time_s = time.perf_counter() - start
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if config.learned:
            save_checkpoint(model, os.path.join(out_dir, "checkpoint.json"), config.to_json(),
                            {"global_scale": global_scale, "config_hash": report.config_hash})
        report.save(os.path.join(out_dir, "report.json"))
    logger.info("Finished %s (%s) in %.1f s", config.model, report.config_hash, report.wall_time_s)
    return model, report
