import numpy as np
import pytest

from vlcsec import CcpConfig, ReceiverPosition, channel_vector, default_scene


@pytest.fixture(scope="session")
def scene():
    return default_scene()


@pytest.fixture(scope="session")
def ccp_cfg():
    return CcpConfig(lambda_db=0.0)


@pytest.fixture(scope="session")
def center_channels(scene):
    """Bob at the room center, Eve off-center near luminaire 3."""
    h_b = channel_vector(scene, ReceiverPosition(0.0, 0.0))
    h_e = channel_vector(scene, ReceiverPosition(1.8, 1.2))
    return h_b, h_e


def random_positions(rng, scene, n):
    lo = [-scene.length_m / 2, -scene.width_m / 2]
    hi = [scene.length_m / 2, scene.width_m / 2]
    return [(tuple(rng.uniform(lo, hi)), tuple(rng.uniform(lo, hi))) for _ in range(n)]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
