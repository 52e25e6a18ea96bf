# tests/pipeline/conftest.py
import numpy as np
import pytest

from src.model.instance import BERNOULLI_SUPPORT, LmabInstance
from src.schemas.config_schema import GeneratorParams, RunConfigSchema


@pytest.fixture
def make_config():
    """Configuración pequeña sobre generador; los kwargs sobrescriben campos."""

    def factory(**overrides):
        fields = {
            "generator": GeneratorParams(m=2, a=3, z=2, h=3, seed=5),
            "n0": 2_000,
            "n1": 50,
            "n": 2_000,
            "eval_episodes": 500,
            "selection_episodes": 200,
            "restarts": 1,
            "seed": 123,
        }
        fields.update(overrides)
        return RunConfigSchema(**fields)

    return factory


@pytest.fixture(scope="module")
def single_context():
    p = np.array([[0.2, 0.5, 0.8]])
    return LmabInstance(
        weights=np.array([1.0]),
        horizon=3,
        support=BERNOULLI_SUPPORT,
        reward_probs=np.stack([1.0 - p, p], axis=-1),
    )
