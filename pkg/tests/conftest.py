import pytest

from nsatp.transit.dataset import build_dataset, slice_samples
from nsatp.transit.simulator import DelayProcessParams, make_route, simulate_day


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the long end-to-end experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long end-to-end experiment, run with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def route():
    return make_route(20, seed=0)


@pytest.fixture(scope="session")
def short_service():
    # 13 departures between 6:00 and 9:00, so peak and off-peak stops both occur
    return DelayProcessParams(first_departure_s=6 * 3600.0, last_departure_s=9 * 3600.0, seed=1)


@pytest.fixture(scope="session")
def day(route):
    return simulate_day(route, DelayProcessParams(seed=3), 0)


@pytest.fixture(scope="session")
def samples(day):
    return slice_samples([day], 10, 5).samples


@pytest.fixture(scope="session")
def small_dataset(route, short_service):
    return build_dataset(route, short_service, n_days=3, n_past=10, n_future=5)
