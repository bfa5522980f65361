import numpy as np
import pytest

from pmisample import GridDims, make_synthetic
from pmisample.synthetic import feature_spec, noise_spec


@pytest.fixture(scope="session")
def feature_64():
    spec = feature_spec(64)
    return spec, make_synthetic(spec, 7)


@pytest.fixture(scope="session")
def noise_64():
    spec = noise_spec(64)
    return spec, make_synthetic(spec, 7)


@pytest.fixture
def tiny_dims():
    return GridDims(2, 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
