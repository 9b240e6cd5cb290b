import math

import numpy as np
import pytest
from hypothesis import settings

from filamentlab.gamma import estimate_gamma
from filamentlab.geometry import DomainGeometry

settings.register_profile("numeric", deadline=None)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def gamma_value():
    """Calibrated core-energy constant, shared by the energy tests."""
    return estimate_gamma(tol=1e-3).value


@pytest.fixture
def unit_disk():
    return DomainGeometry.disk(1.0, 2.0 * math.pi, 16, 16, 8)


@pytest.fixture
def square():
    return DomainGeometry.rectangle(1.0, 1.0, 2.0 * math.pi, 64, 64, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
