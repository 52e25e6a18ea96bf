# tests/moments/conftest.py
import numpy as np
import pytest

from src.design.optimal_design import select_core_coordinates, solve_optimal_design
from src.generators.instance_generator import generate_random_instance
from src.moments.params import LatentParams
from src.moments.tensors import MomentTensor, mixture_tensor
from src.subspace.second_moment import (
    exact_second_moment,
    feature_matrix_from_subspace,
    top_m_eigenspace,
)


@pytest.fixture(scope="module")
def instance():
    return generate_random_instance(2, 3, 2, 3, 2, np.random.default_rng(31))


@pytest.fixture(scope="module")
def core(instance):
    sub = top_m_eigenspace(exact_second_moment(instance), instance.M)
    phi = feature_matrix_from_subspace(sub, instance.A, instance.support.values)
    return select_core_coordinates(phi, solve_optimal_design(phi))


@pytest.fixture(scope="module")
def true_params(instance, core):
    return LatentParams(instance.weights, core.restrict(instance.flat_reward_vectors()))


@pytest.fixture(scope="module")
def toy_params():
    # 2 componentes sobre 4 coordenadas, bien separadas
    return LatentParams(
        np.array([0.35, 0.65]),
        np.array([[0.2, 0.7, 0.4, 0.9], [0.8, 0.3, 0.6, 0.15]]),
    )


@pytest.fixture(scope="module")
def toy_tensors(toy_params):
    return [
        MomentTensor(order, mixture_tensor(toy_params.weights, toy_params.core_values, order))
        for order in (1, 2, 3)
    ]
