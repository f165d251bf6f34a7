import numpy as np
import pytest

from dense_orbits.orbit import dense_orbit

SCHEDULE_M1 = (2.0, 1.0, 0.5, 0.25)
SCHEDULE_M2 = (4.0, 2.0)


@pytest.fixture(scope="session")
def run_m1():
    return dense_orbit(1, SCHEDULE_M1, seed=0)


@pytest.fixture(scope="session")
def run_m2():
    return dense_orbit(2, SCHEDULE_M2, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
