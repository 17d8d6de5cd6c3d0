"""
Dataset objects holding sliding-window TemporalSamples cut from simulated service days,
tagged with the split (train/val/test) of the day they come from.
"""
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from torch.utils.data import Dataset as TorchDataset

from nsatp.exceptions import DatasetError
from nsatp.transit.sample import N_CONTEXT, N_FEATURES, TemporalSample
from nsatp.transit.simulator import (DelayProcessParams, RouteSpec, SimulatedDay, SimulatedTrip, is_peak, is_weekday,
                                     simulate_days)

logger = logging.getLogger(__name__)

DATASET_SCHEMA = "nsatp-ds/1"
SPLITS = ("train", "val", "test")


class Dataset(TorchDataset):
    def __init__(self, samples: List[TemporalSample] = None, n_past: int = None, n_future: int = None,
                 metadata: dict = None, skipped_trips: int = 0, filename: str = None):
        super(Dataset, self).__init__()
        self.samples = samples if samples is not None else []
        self.n_past = n_past
        self.n_future = n_future
        self.metadata = metadata if metadata is not None else {}
        self.skipped_trips = skipped_trips
        self.filename = filename

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int) -> dict:
        return self.samples[idx].to_tensors()

    def split(self, name: str) -> 'Dataset':
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}, expected one of {SPLITS}")
        return Dataset([sample for sample in self.samples if sample.split == name], self.n_past, self.n_future,
                       dict(self.metadata))

    @property
    def split_counts(self) -> Dict[str, int]:
        return {name: sum(1 for sample in self.samples if sample.split == name) for name in SPLITS}

    def save(self, filename: str = None) -> None:
        if filename is None:
            if self.filename is None:
                raise FileNotFoundError("No filename given for saving")
            filename = self.filename
        header = {"schema": DATASET_SCHEMA, "n_past": self.n_past, "n_future": self.n_future,
                  "n_samples": len(self.samples), "skipped_trips": self.skipped_trips, "metadata": self.metadata}
        with open(filename, "w") as f:
            f.write(json.dumps(header) + "\n")
            for sample in self.samples:
                f.write(json.dumps(sample.to_json()) + "\n")
        logger.info("Saved %d samples to %s", len(self.samples), filename)

    def load(self, filename: str = None) -> None:
        if filename is None:
            if self.filename is None:
                raise FileNotFoundError("No filename given for loading")
            filename = self.filename
        if not os.path.exists(filename):
            raise FileNotFoundError(f"Dataset file {filename} does not exist")
        with open(filename, "r") as f:
            try:
                header = json.loads(f.readline())
                samples = [TemporalSample.from_json(json.loads(line)) for line in f if line.strip()]
            except (json.JSONDecodeError, KeyError) as ex:
                raise DatasetError(f"{filename} is not a valid {DATASET_SCHEMA} file: {ex}") from ex
        if header.get("schema") != DATASET_SCHEMA:
            raise DatasetError(f"{filename} has schema {header.get('schema')!r}, expected {DATASET_SCHEMA!r}")
        if header.get("n_samples", len(samples)) != len(samples):
            raise DatasetError(f"{filename} is truncated: {len(samples)} of {header['n_samples']} samples")
        self.samples = samples
        self.n_past = header["n_past"]
        self.n_future = header["n_future"]
        self.skipped_trips = header.get("skipped_trips", 0)
        self.metadata = header.get("metadata", {})
        self.filename = filename
        logger.info("Loaded %d samples (%d->%d) from %s", len(samples), self.n_past, self.n_future, filename)

    @classmethod
    def from_file(cls, filename: str) -> 'Dataset':
        dataset = cls()
        dataset.load(filename)
        return dataset


def link_mean_travel_times(days: Iterable[SimulatedDay]) -> np.ndarray:
    """
    Average actual travel time per link over every trip of the given days
    """
    travel_times = [trip.link_travel_times for day in days for trip in day.trips]
    if not travel_times:
        raise ValueError("no trips to average link travel times over")
    return np.mean(np.stack(travel_times), axis=0)


def window_count(n_stops: int, n_past: int, n_future: int) -> int:
    return max(0, n_stops - n_past - n_future + 1)


def stop_features(route: RouteSpec, trip: SimulatedTrip, link_means: np.ndarray) -> np.ndarray:
    """
    One feature row per stop describing the link that ends there. The first stop has no incoming
    link, so its link length, travel times and signal flag are zero.
    """
    def per_stop(per_link):
        return np.concatenate([[0.0], np.asarray(per_link, dtype=np.float64)[:trip.n_links]])

    return np.stack([per_stop(route.link_length_m), per_stop(trip.link_travel_times), trip.delays,
                     per_stop(route.signalized), per_stop(link_means)], axis=1)


def slice_samples(days: Sequence[SimulatedDay], n_past: int, n_future: int,
                  link_means: Optional[np.ndarray] = None, split: Optional[str] = None) -> Dataset:
    """
    Cuts every trip into stride-1 windows of n_past observed stops followed by n_future
    predicted stops. Trips with fewer than n_past + n_future stops are skipped and counted.

    Args:
        days: simulated service days sharing one route
        n_past: number of past stops N_p
        n_future: number of future stops N_f
        link_means: mean travel time per link; computed from ``days`` when omitted
        split: split tag written on every sample

    Returns:
        dataset: Dataset with the samples and the number of skipped trips
    """
    if n_past <= 0 or n_future <= 0:
        raise ValueError("n_past and n_future must be positive")
    if link_means is None:
        link_means = link_mean_travel_times(days)
    samples, skipped = [], 0
    for day in days:
        route = day.route
        weekday = is_weekday(day.day_index)
        for trip in day.trips:
            n_stops = len(trip.schedule)
            n_windows = window_count(n_stops, n_past, n_future)
            if n_windows == 0:
                skipped += 1
                continue
            features = stop_features(route, trip, link_means)
            # the peak flag belongs to the trip departure
            peak = float(is_peak(trip.schedule[0], weekday))
            context = np.tile([peak, float(weekday)], (n_stops, 1))
            for start in range(n_windows):
                past = slice(start, start + n_past)
                window = slice(start, start + n_past + n_future)
                future_stops = slice(start + n_past, start + n_past + n_future)
                samples.append(TemporalSample(past_features=features[past].copy(), context=context[window].copy(),
                                              future_schedule=trip.schedule[future_stops].copy(),
                                              future_delay_truth=trip.delays[future_stops].copy(),
                                              day_index=day.day_index, trip_id=trip.trip_id,
                                              stop_index=start + n_past, split=split))
    if skipped:
        logger.warning("Skipped %d trips shorter than %d stops", skipped, n_past + n_future)
    return Dataset(samples, n_past, n_future, skipped_trips=skipped)


def split_day_indices(n_days: int, fractions: Sequence[float] = (0.7, 0.1, 0.2)) -> Dict[str, List[int]]:
    """
    Chronological split of day indices; every split gets at least one day when n_days >= 3
    """
    if n_days < 3:
        raise ValueError("at least three days are needed for a train/val/test split")
    n_train = max(1, int(round(fractions[0] * n_days)))
    n_val = max(1, int(round(fractions[1] * n_days)))
    n_train = min(n_train, n_days - n_val - 1)
    days = list(range(n_days))
    return {"train": days[:n_train], "val": days[n_train:n_train + n_val], "test": days[n_train + n_val:]}


def build_dataset(route: RouteSpec, params: DelayProcessParams, n_days: int, n_past: int, n_future: int,
                  fractions: Sequence[float] = (0.7, 0.1, 0.2), jobs: int = 1) -> Dataset:
    """
    Simulates n_days service days, splits them by day and slices every split with the
    link mean travel times of the training days.
    """
    route.validate(n_past, n_future)
    split_days = split_day_indices(n_days, fractions)
    days = simulate_days(route, params, range(n_days), jobs=jobs)
    link_means = link_mean_travel_times([days[i] for i in split_days["train"]])
    samples, skipped = [], 0
    for name in SPLITS:
        part = slice_samples([days[i] for i in split_days[name]], n_past, n_future, link_means, split=name)
        samples += part.samples
        skipped += part.skipped_trips
    metadata = {"route": route.to_json(), "delay_process": params.to_json(), "n_days": n_days,
                "split_days": split_days, "n_features": N_FEATURES, "n_context": N_CONTEXT}
    dataset = Dataset(samples, n_past, n_future, metadata, skipped_trips=skipped)
    logger.info("Built dataset with %s samples", dataset.split_counts)
    return dataset
