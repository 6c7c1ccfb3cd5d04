import numpy as np
import pytest

from mimopred.channel import ChannelConfig, Path, PathSet, sample_grid, scenario_one_paths


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_config():
    """Grid used by the clean-recovery checks."""
    return ChannelConfig(n_time=20, n_freq=16)


@pytest.fixture(scope="session")
def table3():
    return scenario_one_paths()


@pytest.fixture(scope="session")
def clean_table3(small_config, table3):
    return sample_grid(table3, small_config)


def single_path(beta=1.0 + 0.0j, aoa=0.3, aod=-0.7, delay_ns=60.0, nu=185.1) -> PathSet:
    return PathSet((Path(complex(beta), aoa, aod, delay_ns * 1e-9, nu),))
