import numpy as np
import pytest

from sindycrypt.core.cipher import CipherConfig, GrayImage, encrypt
from sindycrypt.core.identify import build_library
from sindycrypt.core.keystream import Key
from sindycrypt.core.maps import builtin_henon, iterate
from sindycrypt.core.sample_image import moon_surface_standin


@pytest.fixture(scope="session")
def henon():
    return builtin_henon()


@pytest.fixture(scope="session")
def henon_trajectory(henon):
    """10^4 个无噪声状态，初值 (0.1, 0.1)"""
    return iterate(henon, (0.1, 0.1), 10000)


@pytest.fixture(scope="session")
def henon_library():
    return build_library(2, 3)


@pytest.fixture(scope="session")
def cipher_config(henon):
    return CipherConfig(henon, Key((0.2, 0.3)))


@pytest.fixture(scope="session")
def moon():
    return moon_surface_standin()


@pytest.fixture(scope="session")
def moon_cipher(moon, cipher_config):
    return encrypt(moon, cipher_config)


@pytest.fixture
def small_image():
    rng = np.random.default_rng(11)
    return GrayImage(rng.integers(0, 256, size=(24, 32), dtype=np.uint8))


@pytest.fixture
def gradient_image():
    """I(i, j) = j"""
    return GrayImage(np.tile(np.arange(256, dtype=np.uint8), (256, 1)))
