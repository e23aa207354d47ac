import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "properties: standalone algebraic property suites")
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
