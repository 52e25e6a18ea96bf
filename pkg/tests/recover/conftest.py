# tests/recover/conftest.py
import numpy as np
import pytest

from src.design.optimal_design import select_core_coordinates, solve_optimal_design
from src.generators.instance_generator import (
    generate_random_gaussian_instance,
    generate_random_instance,
)
from src.moments.params import LatentParams
from src.subspace.second_moment import (
    exact_second_moment,
    feature_matrix_from_subspace,
    top_m_eigenspace,
)


def _core_for(inst, support_values):
    sub = top_m_eigenspace(exact_second_moment(inst), inst.M)
    phi = feature_matrix_from_subspace(sub, inst.A, support_values)
    return select_core_coordinates(phi, solve_optimal_design(phi))


@pytest.fixture(scope="module")
def instance():
    return generate_random_instance(2, 4, 2, 3, 2, np.random.default_rng(41))


@pytest.fixture(scope="module")
def core(instance):
    return _core_for(instance, instance.support.values)


@pytest.fixture(scope="module")
def true_params(instance, core):
    return LatentParams(instance.weights, core.restrict(instance.flat_reward_vectors()))


@pytest.fixture(scope="module")
def gaussian_instance():
    return generate_random_gaussian_instance(2, 4, 3, 2, np.random.default_rng(42))


@pytest.fixture(scope="module")
def gaussian_core(gaussian_instance):
    return _core_for(gaussian_instance, None)
