import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ahricci.geometry import RadialGrid, from_profile, hyperbolic_metric

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def gauss(r):
    return r ** 2 * np.exp(-r ** 2)


@pytest.fixture(scope="session")
def grid3():
    return RadialGrid.from_spacing(3, 10.0, 0.05)


@pytest.fixture(scope="session")
def gh3(grid3):
    return hyperbolic_metric(grid3)


@pytest.fixture(scope="session")
def gw3(grid3):
    return from_profile(grid3, gauss)
