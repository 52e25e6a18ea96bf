# tests/mle/conftest.py
import numpy as np
import pytest

from src.mle.dataset import simulate_dataset
from src.moments.params import LatentParams


@pytest.fixture(scope="module")
def truth():
    return LatentParams(
        np.array([0.4, 0.6]),
        np.array([[0.15, 0.8, 0.3], [0.75, 0.2, 0.9]]),
    )


@pytest.fixture(scope="module")
def dataset(truth):
    return simulate_dataset(truth, 200_000, 3, np.random.default_rng(17))
