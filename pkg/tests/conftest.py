import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "rhoci", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("rhoci")


@pytest.fixture
def gen():
    return np.random.default_rng(20240521)
