import numpy as np
import pytest

from weierbaker import Roughness


@pytest.fixture(scope="session")
def r055():
    """The working parameter most certificates are exercised at."""
    return Roughness.from_kappa(0.55)


@pytest.fixture(scope="session")
def r_root2():
    """gamma = 2**-1/2, the half-exponent curve."""
    return Roughness.from_gamma(2.0**-0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
