import numpy as np
import pytest

from app.schemas.base import TripletMargins


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def margins():
    return TripletMargins(alpha=0.8, beta=0.4)
