"""
Experiments built on top of training and evaluation:

- stationarity_shift: mean ADF statistic of simulated delay windows before and after window-wise
  series stationarization
- compare_compensation: NSATP against its uncompensated base model over several seeds
"""
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import List, Sequence

import numpy as np

from nsatp.exceptions import CollinearError, ConfigError
from nsatp.featurizers.stationarization import stationarize_windowwise
from nsatp.harness.config import ExperimentConfig
from nsatp.harness.report import RunReport, format_table
from nsatp.harness.trainer import train
from nsatp.stats.adf import adf_test
from nsatp.transit.dataset import Dataset
from nsatp.transit.simulator import DelayProcessParams, RouteSpec, simulate_day

logger = logging.getLogger(__name__)


@dataclass
class StationarityShift:
    mean_before: float
    mean_after: float
    n_windows: int
    n_skipped: int

    def to_json(self) -> dict:
        return asdict(self)


def delay_windows(route: RouteSpec, params: DelayProcessParams, n_windows: int, length: int) -> List[np.ndarray]:
    """
    Non-overlapping windows of per-stop delays, cut trip by trip from consecutive simulated days
    """
    if length > route.n_stops:
        raise ConfigError(f"windows of {length} stops do not fit a route of {route.n_stops} stops")
    windows, day_index = [], 0
    while len(windows) < n_windows:
        for trip in simulate_day(route, params, day_index).trips:
            windows += [trip.delays[start:start + length] for start in range(0, len(trip.delays) - length + 1, length)]
        day_index += 1
    return windows[:n_windows]


def stationarity_shift(route: RouteSpec, params: DelayProcessParams, n_windows: int = 500, length: int = 20,
                       window: int = 5, kind: str = "constant_and_trend") -> StationarityShift:
    before, after, skipped = [], [], 0
    for series in delay_windows(route, params, n_windows, length):
        try:
            statistic_before = adf_test(series, kind=kind, min_length=length).statistic
            statistic_after = adf_test(stationarize_windowwise(series, window), kind=kind, min_length=length).statistic
        except (CollinearError, ValueError):
            skipped += 1
            continue
        before.append(statistic_before)
        after.append(statistic_after)
    if not before:
        raise ValueError("no window produced an ADF statistic")
    shift = StationarityShift(float(np.mean(before)), float(np.mean(after)), len(before), skipped)
    logger.info("Mean ADF %.3f before, %.3f after stationarization (%d windows)", shift.mean_before,
                shift.mean_after, shift.n_windows)
    return shift


@dataclass
class ComparisonRow:
    seed: int
    nsatp: RunReport
    base: RunReport

    @property
    def rmse_win(self) -> bool:
        return self.nsatp.test.rmse_s < self.base.test.rmse_s

    @property
    def adf_win(self) -> bool:
        if self.nsatp.adf_ratio is None or self.base.adf_ratio is None:
            return False
        return abs(self.nsatp.adf_ratio - 1.0) <= abs(self.base.adf_ratio - 1.0)


@dataclass
class Comparison:
    backbone: str
    n_future: int
    rows: List[ComparisonRow] = field(default_factory=list)

    @property
    def rmse_wins(self) -> int:
        return sum(row.rmse_win for row in self.rows)

    @property
    def adf_wins(self) -> int:
        return sum(row.adf_win for row in self.rows)

    def to_json(self) -> dict:
        return {"backbone": self.backbone, "n_future": self.n_future, "rmse_wins": self.rmse_wins,
                "adf_wins": self.adf_wins, "n_seeds": len(self.rows),
                "rows": [{"seed": row.seed, "nsatp": row.nsatp.to_json(), "base": row.base.to_json()}
                         for row in self.rows]}

    def __str__(self) -> str:
        rows = [[str(row.seed), row.nsatp.test.rmse_s, row.base.test.rmse_s, row.nsatp.adf_ratio,
                 row.base.adf_ratio] for row in self.rows]
        table = format_table(["seed", "NSATP RMSE", "base RMSE", "NSATP ADF ratio", "base ADF ratio"], rows)
        return (f"{self.backbone} {self.n_future}-stop horizon\n{table}\n"
                f"RMSE wins {self.rmse_wins}/{len(self.rows)}, ADF ratio wins {self.adf_wins}/{len(self.rows)}")


def compare_compensation(config: ExperimentConfig, dataset: Dataset, seeds: Sequence[int]) -> Comparison:
    """
    Trains NSATP and its base model with identical seeds (hence identical backbone initialisation) on the same
    dataset and records both test reports per seed
    """
    backbone = config.backbone
    if backbone is None:
        raise ConfigError(f"{config.model} has no compensated variant")
    comparison = Comparison(backbone, dataset.n_future)
    for seed in seeds:
        common = dict(seed=seed, n_future=dataset.n_future, n_past=dataset.n_past)
        _, nsatp = train(replace(config, model=f"nsatp_{backbone}", **common), dataset)
        base_config = replace(config, model=f"arrivalnet_{backbone}", placement="after_last_block",
                              inner_compensation=True, outer_compensation=True, **common)
        _, base = train(base_config, dataset)
        comparison.rows.append(ComparisonRow(seed, nsatp, base))
        logger.info("Seed %d: NSATP RMSE %.3f, base RMSE %.3f", seed, nsatp.test.rmse_s, base.test.rmse_s)
    return comparison
