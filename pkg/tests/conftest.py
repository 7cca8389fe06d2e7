import pytest

from asym.fixtures import example66_system, rg_system


@pytest.fixture(scope="session")
def rg():
    return rg_system()


@pytest.fixture(scope="session")
def ex66():
    return example66_system()
