# tests/planning/conftest.py
import numpy as np
import pytest

from src.model.instance import BERNOULLI_SUPPORT, LmabInstance


def bernoulli_instance(weights, success, horizon):
    """Instancia Bernoulli a partir de la tabla M × A de probabilidades de éxito."""
    p = np.asarray(success, dtype=float)
    return LmabInstance(
        weights=np.asarray(weights, dtype=float),
        horizon=horizon,
        support=BERNOULLI_SUPPORT,
        reward_probs=np.stack([1.0 - p, p], axis=-1),
    )


@pytest.fixture(scope="module")
def make_bernoulli():
    return bernoulli_instance


@pytest.fixture(scope="module")
def conflicting():
    # el mejor brazo depende del contexto: aprender el contexto compensa
    return bernoulli_instance([0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]], 4)


@pytest.fixture(scope="module")
def single_context():
    return bernoulli_instance([1.0], [[0.2, 0.5, 0.9]], 3)
