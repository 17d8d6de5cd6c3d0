from .sample import TemporalSample
from .simulator import (RouteSpec, DelayProcessParams, SimulatedDay, SimulatedTrip, make_route, simulate_day,
                        simulate_days)
from .dataset import Dataset, slice_samples, build_dataset
