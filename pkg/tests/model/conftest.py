# tests/model/conftest.py
import numpy as np
import pytest

from src.generators.instance_generator import generate_random_instance
from src.model.instance import BERNOULLI_SUPPORT, LmabInstance


@pytest.fixture(scope="module")
def tiny_instance():
    # 2 contextos, 2 brazos, recompensas Bernoulli, H=3
    probs = np.array(
        [
            [[0.2, 0.8], [0.9, 0.1]],
            [[0.6, 0.4], [0.3, 0.7]],
        ]
    )
    return LmabInstance(
        weights=np.array([0.3, 0.7]),
        horizon=3,
        support=BERNOULLI_SUPPORT,
        reward_probs=probs,
    )


@pytest.fixture(scope="module")
def random_instance():
    return generate_random_instance(2, 3, 2, 3, 2, np.random.default_rng(7))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
