import numpy as np
import pytest

from src.model.instance import (
    BERNOULLI_SUPPORT,
    LmabInstance,
    RewardKind,
    RewardSupport,
    SeparationConfig,
    validate_instance,
)


def test_support_requires_increasing_values():
    with pytest.raises(ValueError):
        RewardSupport((1.0, 0.0))


def test_support_rejects_unbounded_values():
    with pytest.raises(ValueError):
        RewardSupport((0.0, 1.5))
    # un soporte discretizado sí puede salirse de [−1, 1]
    assert RewardSupport((0.0, 1.5), bounded=False).size == 2


def test_support_index_of():
    assert BERNOULLI_SUPPORT.index_of(1.0) == 1
    with pytest.raises(ValueError):
        BERNOULLI_SUPPORT.index_of(0.5)


def test_instance_arrays_are_read_only(tiny_instance):
    with pytest.raises(ValueError):
        tiny_instance.weights[0] = 0.5
    with pytest.raises(ValueError):
        tiny_instance.probs[0, 0, 0] = 0.5


def test_instance_dimensions(tiny_instance):
    assert (tiny_instance.M, tiny_instance.A, tiny_instance.Z, tiny_instance.H) == (2, 2, 2, 3)
    assert not tiny_instance.is_gaussian


def test_instance_shape_mismatch_raises():
    with pytest.raises(ValueError):
        LmabInstance(
            weights=np.array([0.5, 0.5]),
            horizon=2,
            support=BERNOULLI_SUPPORT,
            reward_probs=np.full((3, 2, 2), 0.5),
        )


def test_valid_instance_passes(tiny_instance, random_instance):
    assert validate_instance(tiny_instance).passed
    assert validate_instance(random_instance).passed


def test_validation_reports_codes():
    """Una instancia mal formada se construye, pero el reporte la marca."""
    inst = LmabInstance(
        weights=np.array([0.6, 0.6]),
        horizon=2,
        support=BERNOULLI_SUPPORT,
        reward_probs=np.array([[[1.1, -0.1]], [[0.5, 0.6]]]),
    )
    report = validate_instance(inst)
    assert not report.passed
    assert {"weights_sum", "row_negative", "row_sum"} <= report.codes


def test_gaussian_mean_bound():
    inst = LmabInstance(
        weights=np.array([1.0]),
        horizon=2,
        reward_kind=RewardKind.GAUSSIAN,
        gaussian_means=np.array([[0.5, 1.5]]),
    )
    assert "mean_bound" in validate_instance(inst).codes


def test_mean_rewards(tiny_instance):
    expected = np.array([[0.8, 0.1], [0.4, 0.7]])
    np.testing.assert_allclose(tiny_instance.mean_rewards(), expected)


def test_permuted_relabels_contexts(tiny_instance):
    swapped = tiny_instance.permuted([1, 0])
    np.testing.assert_allclose(swapped.weights, [0.7, 0.3])
    np.testing.assert_allclose(swapped.probs[0], tiny_instance.probs[1])


def test_with_horizon_keeps_rewards(tiny_instance):
    longer = tiny_instance.with_horizon(5)
    assert longer.H == 5
    np.testing.assert_array_equal(longer.probs, tiny_instance.probs)


def test_separation_config(tiny_instance):
    # ‖μ_1(a0) − μ_2(a0)‖₁ = 0.8, ‖μ_1(a1) − μ_2(a1)‖₁ = 1.2
    assert SeparationConfig(1.0).is_satisfied(tiny_instance.probs)
    assert not SeparationConfig(1.3).is_satisfied(tiny_instance.probs)
    with pytest.raises(ValueError):
        SeparationConfig(0.0)
