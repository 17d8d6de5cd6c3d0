"""
Ablation grid over the series-stationarization switch and the compensation variants:

    CNN:  SS w/, w/o  x  placement inside each block (IN), after the last block (OUT)   -> 4 rows
    Swin: SS w/, w/o  x  attention factors only, output factors only, both              -> 6 rows
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List

from nsatp.exceptions import ConfigError
from nsatp.harness.config import ExperimentConfig, config_hash
from nsatp.harness.report import RunReport, metrics_table
from nsatp.harness.trainer import train
from nsatp.transit.dataset import Dataset

logger = logging.getLogger(__name__)

CNN_PLACEMENTS = (("IN", "inside_each_block"), ("OUT", "after_last_block"))
SWIN_VARIANTS = (("tau1/delta1", True, False), ("tau2/delta2", False, True), ("both", True, True))


@dataclass
class AblationCell:
    label: str
    config: ExperimentConfig


def ablation_grid(config: ExperimentConfig) -> List[AblationCell]:
    if config.model not in ("nsatp_cnn", "nsatp_swin"):
        raise ConfigError(f"ablations need nsatp_cnn or nsatp_swin, got {config.model}")
    cells = []
    for stationarize in (True, False):
        ss = "SS w/" if stationarize else "SS w/o"
        if config.model == "nsatp_cnn":
            for name, placement in CNN_PLACEMENTS:
                cells.append(AblationCell(f"{ss} | {name}", replace(config, stationarize=stationarize,
                                                                   placement=placement)))
        else:
            for name, inner, outer in SWIN_VARIANTS:
                cells.append(AblationCell(f"{ss} | {name}", replace(config, stationarize=stationarize,
                                                                   inner_compensation=inner,
                                                                   outer_compensation=outer)))
    return cells


def _run_cell(args) -> RunReport:
    config, dataset = args
    logger.info("Ablation cell %s started", config_hash(config))
    _, report = train(config, dataset)
    logger.info("Ablation cell %s finished", config_hash(config))
    return report


@dataclass
class AblationTable:
    rows: Dict[str, RunReport]

    def to_json(self) -> dict:
        return {label: report.to_json() for label, report in self.rows.items()}

    def __str__(self) -> str:
        return metrics_table(self.rows)


def ablate(config: ExperimentConfig, dataset: Dataset, jobs: int = 1) -> AblationTable:
    """
    Trains and scores every grid cell; with jobs > 1 the cells run in worker processes. Rows come back in grid
    order whatever order the cells finish in.
    """
    cells = ablation_grid(config)
    for cell in cells:
        cell.config.validate()
    args = [(cell.config, dataset) for cell in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            reports = list(executor.map(_run_cell, args))
    else:
        reports = [_run_cell(arg) for arg in args]
    by_hash = {report.config_hash: report for report in reports}
    return AblationTable({cell.label: by_hash[config_hash(cell.config)] for cell in cells})
