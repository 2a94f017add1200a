import os

import pytest
from hypothesis import HealthCheck, settings

from weinorman import algebra

settings.register_profile(
    "fast",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def alg2():
    return algebra(2)


@pytest.fixture(scope="session")
def alg3():
    return algebra(3)


@pytest.fixture(scope="session")
def alg4():
    return algebra(4)
