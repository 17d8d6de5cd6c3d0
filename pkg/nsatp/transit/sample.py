"""
A TemporalSample is one sliding window over a trip: the observed features at the past N_p
stops, the binary context over all N_p + N_f stops, and the schedule and ground truth at
the future N_f stops.
"""
from typing import Optional

import numpy as np
import torch

FEATURE_NAMES = ("link_distance_m", "travel_time_s", "delay_s", "signal_flag", "mean_travel_time_s")
CONTEXT_NAMES = ("peak_hour", "weekday")
N_FEATURES = len(FEATURE_NAMES)
N_CONTEXT = len(CONTEXT_NAMES)

DISTANCE_CHANNEL = FEATURE_NAMES.index("link_distance_m")
TRAVEL_TIME_CHANNEL = FEATURE_NAMES.index("travel_time_s")
DELAY_CHANNEL = FEATURE_NAMES.index("delay_s")
SIGNAL_CHANNEL = FEATURE_NAMES.index("signal_flag")
MEAN_TRAVEL_TIME_CHANNEL = FEATURE_NAMES.index("mean_travel_time_s")

MIN_DELAY_S = -300.0
MAX_DELAY_S = 1000.0

# Fixed units the raw window is expressed in before it reaches the compensation networks
REFERENCE_SCALES = np.array([1000.0, 100.0, 100.0, 1.0, 100.0])

TENSOR_FIELDS = ("past_features", "context", "future_schedule", "future_delay_truth", "future_arrival_truth")


class TemporalSample:
    def __init__(self, past_features: np.ndarray, context: np.ndarray, future_schedule: np.ndarray,
                 future_delay_truth: np.ndarray, future_arrival_truth: np.ndarray = None,
                 day_index: int = 0, trip_id: int = 0, stop_index: int = 0, split: Optional[str] = None):
        self.past_features = np.asarray(past_features, dtype=np.float64)
        self.context = np.asarray(context, dtype=np.float64)
        self.future_schedule = np.asarray(future_schedule, dtype=np.float64)
        self.future_delay_truth = np.asarray(future_delay_truth, dtype=np.float64)
        if future_arrival_truth is None:
            future_arrival_truth = self.future_schedule + self.future_delay_truth
        self.future_arrival_truth = np.asarray(future_arrival_truth, dtype=np.float64)
        self.day_index = day_index
        self.trip_id = trip_id
        self.stop_index = stop_index
        self.split = split

    def __repr__(self) -> str:
        return (f"TemporalSample(day={self.day_index}, trip={self.trip_id}, stop={self.stop_index}, "
                f"N_p={self.n_past}, N_f={self.n_future}, split={self.split})")

    @property
    def n_past(self) -> int:
        return self.past_features.shape[0]

    @property
    def n_future(self) -> int:
        return self.future_schedule.shape[0]

    @property
    def past_delays(self) -> np.ndarray:
        return self.past_features[:, DELAY_CHANNEL]

    def validate(self) -> None:
        """
        Checks the schema invariants and raises ValueError on the first violation
        """
        n_past, n_future = self.n_past, self.n_future
        if n_past <= 0 or n_future <= 0:
            raise ValueError("empty window")
        if self.past_features.shape != (n_past, N_FEATURES):
            raise ValueError(f"shape: past_features {self.past_features.shape}, expected ({n_past}, {N_FEATURES})")
        if self.context.shape != (n_past + n_future, N_CONTEXT):
            raise ValueError(f"shape: context {self.context.shape}, expected ({n_past + n_future}, {N_CONTEXT})")
        for name in ("future_delay_truth", "future_arrival_truth"):
            if getattr(self, name).shape != (n_future,):
                raise ValueError(f"shape: {name} {getattr(self, name).shape}, expected ({n_future},)")
        if not np.array_equal(self.future_arrival_truth, self.future_schedule + self.future_delay_truth):
            raise ValueError("future_arrival_truth must equal future_schedule + future_delay_truth")
        binary = np.concatenate([self.past_features[:, SIGNAL_CHANNEL], self.context.ravel()])
        if not np.all((binary == 0.0) | (binary == 1.0)):
            raise ValueError("signal flag and context entries must be 0 or 1")
        delays = np.concatenate([self.past_delays, self.future_delay_truth])
        if np.any(delays < MIN_DELAY_S) or np.any(delays > MAX_DELAY_S):
            raise ValueError(f"delays must lie in [{MIN_DELAY_S}, {MAX_DELAY_S}] s")

    def to_tensors(self) -> dict:
        return {name: torch.from_numpy(getattr(self, name).copy()) for name in TENSOR_FIELDS}

    def to_json(self) -> dict:
        data_dict = {name: getattr(self, name).tolist() for name in TENSOR_FIELDS}
        data_dict.update({"day_index": self.day_index, "trip_id": self.trip_id, "stop_index": self.stop_index,
                          "split": self.split})
        return data_dict

    @classmethod
    def from_json(cls, json_data: dict) -> 'TemporalSample':
        return cls(**{name: np.array(json_data[name], dtype=np.float64) for name in TENSOR_FIELDS},
                   day_index=json_data.get("day_index", 0), trip_id=json_data.get("trip_id", 0),
                   stop_index=json_data.get("stop_index", 0), split=json_data.get("split"))
