"""
Run reports ("nsatp-report/1") and their aligned-text rendering
"""
import json
import os
import platform
import subprocess
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from nsatp._version import __version__
from nsatp.stats.metrics import MetricsReport

REPORT_SCHEMA = "nsatp-report/1"


def provenance() -> str:
    """
    git revision of the working tree when available plus library versions
    """
    try:
        revision = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                                  timeout=5, check=True).stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        revision = "unknown"
    return (f"nsatp {__version__} ({revision}); torch {torch.__version__}; numpy {np.__version__}; "
            f"python {platform.python_version()}")


@dataclass
class RunReport:
    model: str
    config_hash: str
    config: dict
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    best_epoch: Optional[int] = None
    stopped_early: bool = False
    test: Optional[MetricsReport] = None
    adf_ratio: Optional[float] = None
    adf_scored: int = 0
    adf_skipped: int = 0
    wall_time_s: float = 0.0
    provenance: str = ""
    diverged: bool = False

    def to_json(self) -> dict:
        json_data = asdict(self)
        json_data["schema"] = REPORT_SCHEMA
        return json_data

    @classmethod
    def from_json(cls, json_data: dict) -> 'RunReport':
        json_data = dict(json_data)
        if json_data.pop("schema", REPORT_SCHEMA) != REPORT_SCHEMA:
            raise ValueError(f"not a {REPORT_SCHEMA} report")
        if json_data.get("test") is not None:
            json_data["test"] = MetricsReport.from_json(json_data["test"])
        return cls(**json_data)

    def save(self, filename: str) -> None:
        if filename is None:
            raise FileNotFoundError("No filename given for saving")
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, "w") as f:
            json.dump(self.to_json(), f, indent=2)

    @classmethod
    def load(cls, filename: str) -> 'RunReport':
        if not os.path.exists(filename):
            raise FileNotFoundError(f"Report {filename} does not exist")
        with open(filename, "r") as f:
            return cls.from_json(json.load(f))


def _cell(value, digits: int = 3) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """
    Left-aligned first column, right-aligned numbers, columns padded to their widest entry
    """
    cells = [list(header)] + [[_cell(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]

    def line(row):
        return "  ".join(row[0].ljust(widths[0]) if i == 0 else row[i].rjust(widths[i]) for i in range(len(row)))

    rule = "  ".join("-" * width for width in widths)
    return "\n".join([line(cells[0]), rule] + [line(row) for row in cells[1:]])


def metrics_table(reports: Dict[str, RunReport]) -> str:
    """
    One row per labelled run: RMSE, MAE, MAPE and ADF ratio on the test split
    """
    rows = []
    for label, report in reports.items():
        test = report.test
        rows.append([label, test.rmse_s if test else None, test.mae_s if test else None,
                     test.mape_pct if test else None, report.adf_ratio])
    return format_table(["run", "RMSE (s)", "MAE (s)", "MAPE (%)", "ADF ratio"], rows)


def horizon_table(metrics: MetricsReport) -> str:
    rows = [[f"+{h.step}", h.rmse_s, h.mae_s, h.mape_pct] for h in metrics.per_horizon]
    rows.append(["all", metrics.rmse_s, metrics.mae_s, metrics.mape_pct])
    return format_table(["stop", "RMSE (s)", "MAE (s)", "MAPE (%)"], rows)
