import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from npe_adi.charges import PhysicalConstants
from npe_adi.grid3d import Grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def constants():
    return PhysicalConstants.at(298.15)


@pytest.fixture
def small_grid():
    return Grid((-1.0, -1.0, -1.0), 0.5, (5, 6, 7))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
