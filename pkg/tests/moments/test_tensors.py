import math

import numpy as np
import pytest

from src.model.simulator import LmabEnvironment
from src.moments.params import LatentParams
from src.moments.tensors import (
    MomentTensor,
    core_cells,
    delta_tsr_schedule,
    estimate_moment_tensor,
    exact_moment_tensor,
    lift_tensor,
    mixture_tensor,
    moment_residual,
)


def test_mixture_tensor_matches_einsum(toy_params):
    w, V = toy_params.weights, toy_params.core_values
    expected = np.einsum("m,mi,mj,mk->ijk", w, V, V, V)
    np.testing.assert_allclose(mixture_tensor(w, V, 3), expected, atol=1e-14)
    np.testing.assert_allclose(mixture_tensor(w, V, 1), w @ V)


def test_exact_tensor_is_symmetric(instance, core):
    T3 = exact_moment_tensor(instance, core, 3)
    assert T3.dim == core.n
    assert T3.episodes_used == 0
    np.testing.assert_allclose(T3.entries, T3.entries.transpose(1, 0, 2), atol=1e-14)
    np.testing.assert_allclose(T3.entries, T3.entries.transpose(2, 1, 0), atol=1e-14)


def test_core_cells_lexicographic():
    cells = core_cells(2, 3)
    assert cells.shape == (8, 3)
    assert cells[0].tolist() == [0, 0, 0]
    assert cells[1].tolist() == [0, 0, 1]
    assert cells[-1].tolist() == [1, 1, 1]


def test_estimated_tensor_is_close_and_counted(instance, core):
    env = LmabEnvironment(instance)
    rng = np.random.default_rng(4)
    T2 = estimate_moment_tensor(env, core, 2, 20_000, rng)
    assert T2.episodes_used == core.n**2 * 20_000
    assert env.episodes_used == T2.episodes_used
    exact = exact_moment_tensor(instance, core, 2).entries
    assert np.abs(T2.entries - exact).max() < 0.03


def test_estimated_order_three(instance, core):
    env = LmabEnvironment(instance)
    T3 = estimate_moment_tensor(env, core, 3, 2_000, np.random.default_rng(5))
    assert T3.entries.shape == (core.n,) * 3
    exact = exact_moment_tensor(instance, core, 3).entries
    assert np.abs(T3.entries - exact).max() < 0.07


def test_tensor_error_halves_when_budget_quadruples(instance, core):
    """Error máximo de T̂₂ ~ 1/√N₁: cuadruplicar N₁ lo divide por 2 (±40%)."""
    exact = exact_moment_tensor(instance, core, 2).entries

    def max_error(n1):
        errors = []
        for seed in range(20):
            env = LmabEnvironment(instance)
            T2 = estimate_moment_tensor(env, core, 2, n1, np.random.default_rng(600 + seed))
            errors.append(np.abs(T2.entries - exact).max())
        return np.mean(errors)

    ratio = max_error(1_600) / max_error(400)
    assert 0.3 <= ratio <= 0.7


def test_estimate_rejects_order_above_horizon(instance, core):
    env = LmabEnvironment(instance)
    with pytest.raises(ValueError):
        estimate_moment_tensor(env, core, 4, 10, np.random.default_rng(0))
    with pytest.raises(ValueError):
        estimate_moment_tensor(env, core, 2, 0, np.random.default_rng(0))


def test_moment_tensor_validation():
    with pytest.raises(ValueError):
        MomentTensor(2, np.zeros(3))


def test_residual_is_zero_for_true_params(instance, core, true_params):
    tensors = [exact_moment_tensor(instance, core, order) for order in (1, 2, 3)]
    assert max(moment_residual(true_params, tensors)) <= 1e-14


def test_lifted_discrepancy_bound(instance, core, true_params):
    """‖lift(ΔT_l)‖∞ ≤ (√g)^l ‖ΔT_l‖∞ ≤ (2M)^{l/2} ‖ΔT_l‖∞."""
    rng = np.random.default_rng(6)
    M = instance.M
    for _ in range(20):
        noisy = LatentParams(
            rng.dirichlet(np.ones(M)),
            np.clip(true_params.core_values + 0.05 * rng.standard_normal(true_params.core_values.shape), 0, 1),
        )
        for order in (1, 2, 3):
            delta = mixture_tensor(true_params.weights, true_params.core_values, order) - mixture_tensor(
                noisy.weights, noisy.core_values, order
            )
            lifted = np.abs(lift_tensor(delta, core.transform)).max()
            core_gap = np.abs(delta).max()
            assert lifted <= math.sqrt(core.design.g_value) ** order * core_gap + 1e-9
            assert lifted <= (2 * M) ** (order / 2) * core_gap + 1e-9


def test_lift_recovers_full_tensor(instance, core, true_params):
    """En el caso sin ruido, elevar el tensor núcleo da el tensor completo."""
    full = mixture_tensor(instance.weights, instance.flat_reward_vectors(), 2)
    lifted = lift_tensor(mixture_tensor(true_params.weights, true_params.core_values, 2), core.transform)
    np.testing.assert_allclose(lifted, full, atol=1e-8)


def test_delta_tsr_schedule_regimes():
    # H ≥ 2M − 1
    eps, M, Z, H, n = 0.1, 2, 2, 3, 4
    assert delta_tsr_schedule(eps, M, Z, H, n) == pytest.approx(
        (eps / (Z * H**2 * M**3.5 * n)) ** 3
    )
    # H < 2M − 1
    assert delta_tsr_schedule(eps, 4, 2, 3, n) == pytest.approx((eps / 3) / (2 * math.sqrt(8)) ** 3)
