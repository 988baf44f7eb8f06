import pytest

from uavcov import UrbanEnvironment, table1_defaults


@pytest.fixture(scope="session")
def env_table1():
    return UrbanEnvironment(beta=300e-6, delta=0.5, kappa=50.0)


@pytest.fixture(scope="session")
def cfg_table1():
    # standard urban scenario at 100 m height, 25 UAVs/km^2, 0 dB threshold
    return table1_defaults(gamma=100.0, lam=25e-6, theta=1.0)
