import numpy as np
import pytest

from src.design.optimal_design import (
    FeatureMatrix,
    g_value,
    reconstruct_from_core,
    select_core_coordinates,
    solve_optimal_design,
    support_bound,
)


@pytest.mark.parametrize("k, expected", [(1, 16), (2, 13), (10, 49)])
def test_support_bound_values(k, expected):
    assert support_bound(k) == expected


def test_design_is_a_distribution(design, phi):
    assert design.rho.shape == (phi.d,)
    assert np.all(design.rho >= 0)
    assert design.rho.sum() == pytest.approx(1.0, abs=1e-12)
    assert set(design.support) == set(np.flatnonzero(design.rho > 0).tolist())


def test_design_guarantees(design, phi):
    """g(ρ) ≤ 2k y |soporte| ≤ ⌊4k log log k + 16⌋."""
    assert design.g_value <= 2 * phi.k + 1e-9
    assert len(design.support) <= support_bound(phi.k)
    assert design.g_value == pytest.approx(g_value(phi.rows, design.rho), rel=1e-12)


def test_design_guarantees_on_random_matrices():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = int(rng.integers(20, 501))
        k = int(rng.integers(2, 11))
        phi = FeatureMatrix.from_array(rng.standard_normal((d, k)))
        design = solve_optimal_design(phi)
        assert design.g_value <= 2 * k + 1e-9
        assert len(design.support) <= support_bound(k)


def test_g_value_is_at_least_k(design, phi):
    # Kiefer–Wolfowitz: min_ρ g(ρ) = k
    assert design.g_value >= phi.k - 1e-9


def test_reconstruction_is_exact_on_the_span(phi, core):
    coeffs = np.random.default_rng(5).standard_normal((3, phi.k))
    full = coeffs @ phi.rows.T
    np.testing.assert_allclose(reconstruct_from_core(core, core.restrict(full)), full, atol=1e-8)


def test_transform_rows_are_bounded(core):
    row_l1 = np.abs(core.transform).sum(axis=1)
    assert row_l1.max() <= np.sqrt(core.design.g_value) + 1e-9


def test_core_pairs_follow_row_index():
    rng = np.random.default_rng(9)
    index = tuple((a, z) for a in range(5) for z in (0.0, 1.0))
    phi = FeatureMatrix(rng.standard_normal((10, 2)), index)
    core = select_core_coordinates(phi, solve_optimal_design(phi))
    assert core.pairs == tuple(index[i] for i in core.indices)
    np.testing.assert_array_equal(core.actions, [a for a, _ in core.pairs])


def test_reconstruct_rejects_wrong_length(core):
    with pytest.raises(ValueError):
        reconstruct_from_core(core, np.zeros(core.n + 1))


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        FeatureMatrix.from_array(np.ones((5, 2)))
    with pytest.raises(ValueError):
        FeatureMatrix.from_array(np.eye(3)[:2])
