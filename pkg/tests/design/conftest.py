# tests/design/conftest.py
import numpy as np
import pytest

from src.design.optimal_design import (
    FeatureMatrix,
    select_core_coordinates,
    solve_optimal_design,
)


@pytest.fixture(scope="module")
def phi():
    rng = np.random.default_rng(11)
    return FeatureMatrix.from_array(rng.standard_normal((40, 4)))


@pytest.fixture(scope="module")
def design(phi):
    return solve_optimal_design(phi)


@pytest.fixture(scope="module")
def core(phi, design):
    return select_core_coordinates(phi, design)
