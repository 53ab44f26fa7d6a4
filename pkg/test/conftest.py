import pytest

from pulsecool.model.config_types import CD114, DEFAULT_LASER, DEFAULT_TRAP


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo runs; select with -m slow")


def pytest_collection_modifyitems(config, items):
    if "slow" in (config.getoption("-m") or ""):
        return
    skip = pytest.mark.skip(reason="slow; run with -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def cd114():
    return CD114


@pytest.fixture
def trap():
    return DEFAULT_TRAP


@pytest.fixture
def laser():
    return DEFAULT_LASER
