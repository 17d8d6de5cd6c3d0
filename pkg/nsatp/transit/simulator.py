"""
Synthetic transit operations: a route with scheduled link times, trips departing at a
fixed headway through the service day, and a delay process that propagates from stop to
stop with peak-hour, traffic-signal and time-of-day components.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Sequence

import numpy as np

from nsatp.exceptions import ConfigError
from nsatp.transit.sample import MAX_DELAY_S, MIN_DELAY_S

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
PEAK_WINDOWS_H = ((7.0, 9.0), (16.0, 19.0))


@dataclass
class RouteSpec:
    n_stops: int
    link_length_m: np.ndarray
    scheduled_link_time_s: np.ndarray
    signalized: np.ndarray

    def __post_init__(self):
        self.link_length_m = np.asarray(self.link_length_m, dtype=np.float64)
        self.scheduled_link_time_s = np.asarray(self.scheduled_link_time_s, dtype=np.float64)
        self.signalized = np.asarray(self.signalized, dtype=np.float64)

    @property
    def n_links(self) -> int:
        return self.n_stops - 1

    def validate(self, n_past: int = None, n_future: int = None) -> None:
        if self.n_stops < 2:
            raise ConfigError("a route needs at least two stops")
        for name in ("link_length_m", "scheduled_link_time_s", "signalized"):
            if getattr(self, name).shape != (self.n_links,):
                raise ConfigError(f"{name} must have n_stops - 1 = {self.n_links} entries")
        if np.any(self.link_length_m <= 0) or np.any(self.scheduled_link_time_s <= 0):
            raise ConfigError("link lengths and scheduled link times must be positive")
        if not np.all((self.signalized == 0.0) | (self.signalized == 1.0)):
            raise ConfigError("signalized flags must be 0 or 1")
        if n_past is not None and n_future is not None and self.n_stops < n_past + n_future:
            raise ConfigError(f"route with {self.n_stops} stops is too short for {n_past}->{n_future} windows")

    def to_json(self) -> dict:
        return {"n_stops": self.n_stops, "link_length_m": self.link_length_m.tolist(),
                "scheduled_link_time_s": self.scheduled_link_time_s.tolist(), "signalized": self.signalized.tolist()}

    @classmethod
    def from_json(cls, json_data: dict) -> 'RouteSpec':
        return cls(**json_data)


@dataclass
class DelayProcessParams:
    ar_coeff: float = 0.8
    noise_std_s: float = 12.0
    peak_surcharge_s: float = 5.0
    signal_delay_mean_s: float = 3.0
    daily_period_amplitude_s: float = 2.0
    initial_delay_s: float = 10.0
    initial_delay_std_s: float = 30.0
    first_departure_s: float = 5 * 3600.0
    last_departure_s: float = 22 * 3600.0
    headway_s: float = 900.0
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.ar_coeff < 1.0:
            raise ConfigError("ar_coeff must lie in [0, 1)")
        if self.noise_std_s < 0 or self.initial_delay_std_s < 0 or self.signal_delay_mean_s < 0:
            raise ConfigError("standard deviations and the signal delay mean must be non-negative")
        if self.headway_s <= 0 or self.last_departure_s < self.first_departure_s:
            raise ConfigError("departures need a positive headway and last_departure_s >= first_departure_s")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, json_data: dict) -> 'DelayProcessParams':
        unknown = set(json_data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown delay process parameters: {sorted(unknown)}")
        return cls(**json_data)


@dataclass
class SimulatedTrip:
    trip_id: int
    day_index: int
    schedule: np.ndarray  # scheduled arrival per stop, seconds since service-day midnight
    delays: np.ndarray  # delay per stop, seconds

    @property
    def actual(self) -> np.ndarray:
        return self.schedule + self.delays

    @property
    def n_links(self) -> int:
        return len(self.schedule) - 1

    @property
    def link_travel_times(self) -> np.ndarray:
        return np.diff(self.actual)

    def pairs(self) -> list:
        return list(zip(self.schedule.tolist(), self.actual.tolist()))


@dataclass
class SimulatedDay:
    day_index: int
    route: RouteSpec
    trips: List[SimulatedTrip] = field(default_factory=list)

    @property
    def weekday(self) -> bool:
        return is_weekday(self.day_index)


def is_weekday(day_index: int) -> bool:
    return day_index % 7 < 5


def is_peak(time_s, weekday: bool) -> np.ndarray:
    """
    Peak-hour flag for scheduled times in seconds since midnight; peaks only occur on weekdays
    """
    hours = np.mod(np.asarray(time_s, dtype=np.float64), SECONDS_PER_DAY) / 3600.0
    peak = np.zeros_like(hours, dtype=bool)
    if weekday:
        for start, end in PEAK_WINDOWS_H:
            peak |= (hours >= start) & (hours < end)
    return peak


def make_route(n_stops: int, seed: int = 0, signal_fraction: float = 0.5) -> RouteSpec:
    """
    Random but reproducible route: links of 300-900 m driven at ~6 m/s plus a 20 s dwell
    """
    rng = np.random.default_rng([seed, n_stops])
    lengths = np.round(rng.uniform(300.0, 900.0, size=n_stops - 1), 1)
    times = np.round(lengths / 6.0 + 20.0)
    signalized = (rng.random(n_stops - 1) < signal_fraction).astype(np.float64)
    route = RouteSpec(n_stops=n_stops, link_length_m=lengths, scheduled_link_time_s=times, signalized=signalized)
    route.validate()
    return route


def simulate_trip(route: RouteSpec, params: DelayProcessParams, departure_s: float, weekday: bool,
                  rng: np.random.Generator, trip_id: int = 0, day_index: int = 0) -> SimulatedTrip:
    schedule = departure_s + np.concatenate([[0.0], np.cumsum(route.scheduled_link_time_s)])
    peak = bool(is_peak(departure_s, weekday))
    daily = params.daily_period_amplitude_s * np.sin(2.0 * np.pi * (schedule - 6 * 3600.0) / SECONDS_PER_DAY)
    # Draw every stream for every stop so the sequence of draws does not depend on the route flags
    noise = rng.standard_normal(route.n_stops)
    signal_waits = rng.exponential(1.0, size=route.n_stops) * params.signal_delay_mean_s

    delays = np.empty(route.n_stops)
    delays[0] = np.clip(params.initial_delay_s + params.initial_delay_std_s * noise[0], MIN_DELAY_S, MAX_DELAY_S)
    for j in range(1, route.n_stops):
        delay = (params.ar_coeff * delays[j - 1]
                 + params.peak_surcharge_s * peak
                 + signal_waits[j] * route.signalized[j - 1]
                 + daily[j]
                 + params.noise_std_s * noise[j])
        delays[j] = np.clip(delay, MIN_DELAY_S, MAX_DELAY_S)
    return SimulatedTrip(trip_id=trip_id, day_index=day_index, schedule=schedule, delays=delays)


def simulate_day(route: RouteSpec, params: DelayProcessParams, day_index: int) -> SimulatedDay:
    """
    Simulates every trip of one service day. The random stream is derived from
    (seed, day_index) only, so days can be generated in any order or in parallel.
    """
    rng = np.random.default_rng([params.seed, day_index])
    departures = np.arange(params.first_departure_s, params.last_departure_s + 1e-9, params.headway_s)
    weekday = is_weekday(day_index)
    trips = [simulate_trip(route, params, departure, weekday, rng, trip_id=i, day_index=day_index)
             for i, departure in enumerate(departures)]
    return SimulatedDay(day_index=day_index, route=route, trips=trips)


def _simulate_day_star(args):
    return simulate_day(*args)


def simulate_days(route: RouteSpec, params: DelayProcessParams, day_indices: Sequence[int],
                  jobs: int = 1) -> List[SimulatedDay]:
    route.validate()
    params.validate()
    tasks = [(route, params, day_index) for day_index in day_indices]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            days = list(pool.map(_simulate_day_star, tasks))
    else:
        days = [simulate_day(*task) for task in tasks]
    logger.info("Simulated %d service days with %d trips each", len(days), len(days[0].trips) if days else 0)
    return days
