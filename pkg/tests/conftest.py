import numpy as np
import pytest

from polybo.benchmarks import make_objective


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow reproduction tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sphere2():
    return make_objective(1, 2)


@pytest.fixture
def random_polynomial(rng):
    """Factory: random sum_alpha a_alpha x^alpha over an index set, as a vectorized callable."""

    def make(index_set):
        coefficients = rng.uniform(-1.0, 1.0, size=len(index_set))
        exponents = index_set.exponents

        def evaluate(points):
            x = np.atleast_2d(points)
            powers = np.prod(x[:, None, :] ** exponents[None, :, :], axis=2)
            return powers @ coefficients

        return evaluate

    return make
