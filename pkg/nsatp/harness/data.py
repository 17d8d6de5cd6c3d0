"""
Dataset creation and loading from an experiment config
"""
import logging

from nsatp.harness.config import ExperimentConfig
from nsatp.transit.dataset import Dataset, build_dataset
from nsatp.transit.simulator import make_route

logger = logging.getLogger(__name__)


def simulate_dataset(config: ExperimentConfig, n_future: int = None, jobs: int = 1) -> Dataset:
    """
    Simulates the configured route and service days and slices them into N_p -> N_f windows
    """
    simulation = config.simulation
    route = make_route(simulation.n_stops, seed=simulation.route_seed, signal_fraction=simulation.signal_fraction)
    n_future = config.n_future if n_future is None else n_future
    return build_dataset(route, config.delay_process, simulation.n_days, config.n_past, n_future,
                         fractions=simulation.split_fractions, jobs=jobs)


def dataset_for(config: ExperimentConfig) -> Dataset:
    """
    The dataset file named by the config, or a freshly simulated one when it names none
    """
    if config.dataset is not None:
        return Dataset.from_file(config.dataset)
    logger.info("No dataset file configured, simulating %d days", config.simulation.n_days)
    return simulate_dataset(config)
