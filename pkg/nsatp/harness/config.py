"""
Experiment configuration, loaded from TOML:

    model = "nsatp_cnn"
    n_past = 10
    n_future = 5
    epochs = 20
    seed = 0

    [simulation]
    n_days = 20

    [delay_process]
    ar_coeff = 0.8

    [cnn]
    d_model = 16

Top-level keys are ExperimentConfig fields; the tables hold SimulationConfig, DelayProcessParams,
CnnModelConfig and SwinModelConfig fields. Unknown keys are rejected.
"""
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

from nsatp.exceptions import ConfigError
from nsatp.networks.baselines import PersistenceBaseline, ScheduleOnlyBaseline
from nsatp.networks.cnn import PLACEMENTS, CnnArrivalModel, CnnModelConfig
from nsatp.networks.predictor import Predictor
from nsatp.networks.swin import SwinArrivalModel, SwinModelConfig
from nsatp.transit.simulator import DelayProcessParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = ("nsatp_cnn", "nsatp_swin", "arrivalnet_cnn", "arrivalnet_swin", "persistence", "schedule_only")
LEARNED_MODELS = MODELS[:4]


@dataclass
class SimulationConfig:
    n_days: int = 20
    n_stops: int = 30
    signal_fraction: float = 0.5
    route_seed: int = 0
    split_fractions: List[float] = field(default_factory=lambda: [0.7, 0.1, 0.2])

    def validate(self) -> None:
        if self.n_days < 3:
            raise ConfigError("simulation.n_days must be at least 3")
        if self.n_stops < 2:
            raise ConfigError("simulation.n_stops must be at least 2")
        if not 0.0 <= self.signal_fraction <= 1.0:
            raise ConfigError("simulation.signal_fraction must lie in [0, 1]")
        if len(self.split_fractions) != 3 or abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigError("simulation.split_fractions must be three fractions summing to 1")


@dataclass
class ExperimentConfig:
    model: str = "nsatp_cnn"
    dataset: Optional[str] = None
    n_past: int = 10
    n_future: int = 5
    epochs: int = 20
    batch_size: int = 256
    lr: float = 1e-3
    betas: List[float] = field(default_factory=lambda: [0.9, 0.999])
    weight_decay: float = 0.0
    patience: int = 5
    seed: int = 0
    threads: int = 1
    revin: bool = False
    # ablation switches
    stationarize: bool = True
    placement: str = "after_last_block"
    inner_compensation: bool = True
    outer_compensation: bool = True
    # samples scored for the ADF ratio, None for the whole split
    adf_samples: Optional[int] = None
    adf_min_length: int = 10
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    delay_process: DelayProcessParams = field(default_factory=DelayProcessParams)
    cnn: CnnModelConfig = field(default_factory=CnnModelConfig)
    swin: SwinModelConfig = field(default_factory=SwinModelConfig)

    @property
    def learned(self) -> bool:
        return self.model in LEARNED_MODELS

    @property
    def backbone(self) -> Optional[str]:
        return self.model.split("_")[1] if self.learned else None

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        for name in ("n_past", "n_future", "epochs", "batch_size", "patience", "threads", "adf_min_length"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lr <= 0 or len(self.betas) != 2:
            raise ConfigError("lr must be positive and betas a pair")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        defaults = ExperimentConfig()
        if self.backbone != "cnn" and self.placement != defaults.placement:
            raise ConfigError(f"placement only applies to CNN models, not {self.model}")
        swin_switches = (self.inner_compensation, self.outer_compensation)
        if self.model != "nsatp_swin" and swin_switches != (True, True):
            raise ConfigError(f"inner/outer compensation switches only apply to nsatp_swin, not {self.model}")
        if self.model == "nsatp_swin" and not any(swin_switches):
            raise ConfigError("nsatp_swin needs inner_compensation, outer_compensation or both")
        if not self.learned and (self.revin or not self.stationarize):
            raise ConfigError(f"revin and stationarize switches do not apply to {self.model}")
        self.simulation.validate()
        self.delay_process.validate()
        if self.learned:
            self.model_config().validate()

    def model_config(self, global_scale: List[float] = None):
        """
        Backbone config with the experiment-level settings filled in
        """
        common = dict(n_past=self.n_past, n_future=self.n_future, seed=self.seed, revin=self.revin,
                      stationarize=self.stationarize, compensation=self.model.startswith("nsatp"))
        if global_scale is not None:
            common["global_scale"] = list(global_scale)
        if self.backbone == "cnn":
            return replace(self.cnn, placement=self.placement, **common)
        if self.backbone == "swin":
            return replace(self.swin, inner_compensation=self.inner_compensation,
                           outer_compensation=self.outer_compensation, **common)
        raise ConfigError(f"{self.model} has no backbone")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, json_data: dict) -> 'ExperimentConfig':
        json_data = dict(json_data)
        tables = {"simulation": SimulationConfig, "delay_process": DelayProcessParams, "cnn": CnnModelConfig,
                  "swin": SwinModelConfig}
        known = {f.name for f in fields(cls)}
        unknown = set(json_data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name, table_cls in tables.items():
            table = json_data.get(name, {})
            if not isinstance(table, dict):
                raise ConfigError(f"[{name}] must be a table")
            table_known = {f.name for f in fields(table_cls)}
            if set(table) - table_known:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(set(table) - table_known)}")
            json_data[name] = table_cls(**table)
        try:
            config = cls(**json_data)
        except TypeError as ex:
            raise ConfigError(str(ex)) from ex
        config.validate()
        return config

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        config = replace(self, **{name: value for name, value in overrides.items() if value is not None})
        config.validate()
        return config


def load_config(filename: str) -> ExperimentConfig:
    if not os.path.exists(filename):
        raise FileNotFoundError(f"Config file {filename} does not exist")
    with open(filename, "rb") as f:
        try:
            json_data = tomllib.load(f)
        except tomllib.TOMLDecodeError as ex:
            raise ConfigError(f"{filename} is not valid TOML: {ex}") from ex
    return ExperimentConfig.from_json(json_data)


def config_hash(config: ExperimentConfig) -> str:
    """
    Short sha256 of the canonical JSON form
    """
    canonical = json.dumps(config.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_model(config: ExperimentConfig, global_scale: List[float] = None) -> Predictor:
    if config.model == "persistence":
        return PersistenceBaseline()
    if config.model == "schedule_only":
        return ScheduleOnlyBaseline()
    model_config = config.model_config(global_scale)
    if config.backbone == "cnn":
        return CnnArrivalModel(model_config)
    return SwinArrivalModel(model_config)
