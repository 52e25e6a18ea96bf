# tests/subspace/conftest.py
import numpy as np
import pytest

from src.generators.instance_generator import generate_random_instance


@pytest.fixture(scope="module")
def instance():
    # rango completo M = 2, A = 3, Bernoulli
    return generate_random_instance(2, 3, 2, 3, 2, np.random.default_rng(21))
