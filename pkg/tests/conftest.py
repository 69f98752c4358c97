import pytest

from tincell.models.network import NetworkParams, TinParams
from tincell.models.simulation import SimulationConfig, TypicalCell


@pytest.fixture
def macro_net() -> NetworkParams:
    """lambda_b = 5, P = 46 dBm, N = -110 dBm, alpha = 4."""
    return NetworkParams.from_beta(lambda_b=5.0, beta=10**15.6, alpha=4.0)


@pytest.fixture
def sparse_net() -> NetworkParams:
    return NetworkParams.from_beta(lambda_b=1.0, beta=10**15.6, alpha=4.0)


@pytest.fixture
def tin18() -> TinParams:
    return TinParams(m_factor=1.0, mu=1.8)


@pytest.fixture
def small_sim() -> SimulationConfig:
    """About 60 BSs per drop, enough for quick structural checks."""
    return SimulationConfig(trials=40, master_seed=11, min_expected_bs=60)


@pytest.fixture
def crofton_sim(small_sim: SimulationConfig) -> SimulationConfig:
    return small_sim.model_copy(update={"typical_cell": TypicalCell.CROFTON})
