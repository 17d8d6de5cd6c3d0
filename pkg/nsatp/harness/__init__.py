from .config import ExperimentConfig, SimulationConfig, load_config, config_hash, build_model
from .report import RunReport, REPORT_SCHEMA
from .evaluate import Evaluation, evaluate, evaluate_checkpoint, load_model
from .trainer import ArrivalTrainer, train
from .ablation import ablation_grid, ablate
from .diagnostics import stationarity_shift, compare_compensation
