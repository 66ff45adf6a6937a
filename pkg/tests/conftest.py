import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hetnet_uplink import ChannelConfig, NetworkConfig, crossing_probabilities


@pytest.fixture(scope="session")
def desk_cfg() -> NetworkConfig:
    """Reference geometry with the reduced desk-scale population."""
    return NetworkConfig(N=2000, delta=30.0)


@pytest.fixture(scope="session")
def channel() -> ChannelConfig:
    return ChannelConfig()


@pytest.fixture(scope="session")
def probs_at_R(desk_cfg):
    """Crossing probabilities of the cell disk at the default delta."""
    return crossing_probabilities(desk_cfg, desk_cfg.R)


@pytest.fixture(scope="session")
def probs_at_RI(desk_cfg):
    """Crossing probabilities of the interfering disk at the default delta."""
    return crossing_probabilities(desk_cfg, desk_cfg.R_I)
