import json

import numpy as np
import pytest

from nsatp.exceptions import DatasetError
from nsatp.transit.dataset import (SPLITS, Dataset, build_dataset, slice_samples, split_day_indices,
                                   window_count)
from nsatp.transit.sample import DELAY_CHANNEL, TENSOR_FIELDS
from nsatp.transit.simulator import DelayProcessParams, make_route, simulate_day


def one_day(n_stops, seed=0):
    return simulate_day(make_route(n_stops, seed=seed), DelayProcessParams(seed=seed), 0)


def test_shortest_trip_gives_one_window():
    day = one_day(10 + 5)
    dataset = slice_samples([day], 10, 5)
    assert len(dataset) == len(day.trips)
    assert dataset.skipped_trips == 0
    assert all(sample.stop_index == 10 for sample in dataset.samples)


def test_window_count_per_trip():
    day = one_day(10 + 5 + 3)
    dataset = slice_samples([day], 10, 5)
    assert len(dataset) == 4 * len(day.trips)
    assert window_count(18, 10, 5) == 4
    assert window_count(15, 10, 5) == 1
    assert window_count(14, 10, 5) == 0


def test_short_trips_are_skipped():
    day = one_day(10 + 5 - 1)
    dataset = slice_samples([day], 10, 5)
    assert len(dataset) == 0
    assert dataset.skipped_trips == len(day.trips)


def test_window_contents(day):
    dataset = slice_samples([day], 10, 5)
    sample = dataset.samples[7]
    trip = day.trips[sample.trip_id]
    stop = sample.stop_index
    assert np.array_equal(sample.past_delays, trip.delays[stop - 10:stop])
    assert np.array_equal(sample.future_delay_truth, trip.delays[stop:stop + 5])
    assert np.array_equal(sample.future_schedule, trip.schedule[stop:stop + 5])
    travel_times = np.concatenate([[0.0], np.diff(trip.actual)])
    assert np.array_equal(sample.past_features[:, 1], travel_times[stop - 10:stop])
    for sample in dataset.samples:
        sample.validate()


def test_first_stop_has_no_incoming_link(day):
    sample = slice_samples([day], 10, 5).samples[0]
    assert sample.stop_index == 10
    assert sample.past_features[0].tolist() == [0.0, 0.0, day.trips[0].delays[0], 0.0, 0.0]
    assert np.all(sample.past_features[1:, 0] > 0)


def test_context_flags_are_constant_per_trip(day):
    for sample in slice_samples([day], 10, 5).samples:
        assert np.all(sample.context == sample.context[0])


def test_windows_never_cross_trips(day):
    dataset = slice_samples([day], 10, 5)
    for sample in dataset.samples:
        trip = day.trips[sample.trip_id]
        assert sample.stop_index - 10 >= 0
        assert sample.stop_index + 5 <= len(trip.schedule)


def test_getitem(samples):
    dataset = Dataset(samples, 10, 5)
    item = dataset[0]
    assert tuple(item.keys()) == TENSOR_FIELDS
    assert item["past_features"].shape == (10, 5)
    assert item["context"].shape == (15, 2)


def test_split_day_indices():
    split = split_day_indices(20)
    assert split == {"train": list(range(14)), "val": [14, 15], "test": [16, 17, 18, 19]}
    split = split_day_indices(3)
    assert [len(split[name]) for name in SPLITS] == [1, 1, 1]
    with pytest.raises(ValueError):
        split_day_indices(2)


def test_splits_are_disjoint_by_day(small_dataset):
    counts = small_dataset.split_counts
    assert all(counts[name] > 0 for name in SPLITS)
    assert sum(counts.values()) == len(small_dataset)
    days = {name: {sample.day_index for sample in small_dataset.split(name).samples} for name in SPLITS}
    assert days["train"].isdisjoint(days["val"])
    assert days["train"].isdisjoint(days["test"])
    assert days["val"].isdisjoint(days["test"])
    with pytest.raises(ValueError):
        small_dataset.split("holdout")


def test_build_is_deterministic(route, short_service):
    first = build_dataset(route, short_service, n_days=3, n_past=4, n_future=3)
    second = build_dataset(route, short_service, n_days=3, n_past=4, n_future=3)
    assert len(first) == len(second)
    for a, b in zip(first.samples, second.samples):
        assert np.array_equal(a.past_features, b.past_features)
        assert np.array_equal(a.future_arrival_truth, b.future_arrival_truth)


def test_save_load(tmp_path, small_dataset):
    filename = str(tmp_path / "small.jsonl")
    small_dataset.save(filename)
    loaded = Dataset.from_file(filename)
    assert len(loaded) == len(small_dataset)
    assert (loaded.n_past, loaded.n_future) == (10, 5)
    assert loaded.metadata["split_days"] == small_dataset.metadata["split_days"]
    assert loaded.split_counts == small_dataset.split_counts
    for a, b in zip(loaded.samples, small_dataset.samples):
        assert np.array_equal(a.past_features, b.past_features)
        assert np.array_equal(a.context, b.context)
        assert np.array_equal(a.future_delay_truth, b.future_delay_truth)
    assert loaded.samples[0].past_features[:, DELAY_CHANNEL].dtype == np.float64


def test_save_nofile_Dataset(samples):
    dataset = Dataset(samples, 10, 5)
    with pytest.raises(FileNotFoundError):
        dataset.save()


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Dataset.from_file(str(tmp_path / "missing.jsonl"))


def test_load_wrong_schema(tmp_path):
    filename = tmp_path / "wrong.jsonl"
    filename.write_text(json.dumps({"schema": "other/1", "n_past": 10, "n_future": 5, "n_samples": 0}) + "\n")
    with pytest.raises(DatasetError):
        Dataset.from_file(str(filename))


def test_load_truncated(tmp_path, samples):
    filename = str(tmp_path / "truncated.jsonl")
    Dataset(samples[:3], 10, 5).save(filename)
    with open(filename) as f:
        lines = f.readlines()
    with open(filename, "w") as f:
        f.writelines(lines[:-1])
    with pytest.raises(DatasetError):
        Dataset.from_file(filename)
    # DatasetError is an OSError for the command line exit code
    assert issubclass(DatasetError, OSError)
