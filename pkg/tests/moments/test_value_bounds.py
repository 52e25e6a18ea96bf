"""Cotas de diferencia de valor entre dos instancias para la misma política."""

import numpy as np

from src.generators.instance_generator import generate_random_instance
from src.model.instance import LmabInstance
from src.model.oracles import exact_policy_value
from src.model.policies import random_policy_tree
from src.moments.tensors import full_moment_discrepancy
from src.moments.wasserstein import model_transport_distance


def test_value_gap_bounded_by_top_order_moments():
    """|V(π) − V̂(π)| ≤ H · Z^H · ‖ΔT_H‖∞ sobre el espacio completo."""
    rng = np.random.default_rng(12)
    A, Z, H = 4, 2, 4
    for _ in range(20):
        inst = generate_random_instance(2, A, Z, H, 2, rng)
        other = generate_random_instance(3, A, Z, H, 3, rng)
        bound = H * Z**H * full_moment_discrepancy(inst, other, H)
        for _ in range(50):
            tree = random_policy_tree(A, inst.support, H, rng)
            gap = abs(exact_policy_value(inst, tree) - exact_policy_value(other, tree))
            assert gap <= bound + 1e-9


def test_value_gap_bounded_by_transport_distance():
    """|V(π) − V̂(π)| ≤ H² · OT con coste max_a ‖μ_m(a,·) − μ̂_m′(a,·)‖₁."""
    rng = np.random.default_rng(13)
    A, Z, H = 3, 3, 3
    for _ in range(20):
        inst = generate_random_instance(3, A, Z, H, 3, rng)
        other = generate_random_instance(2, A, Z, H, 2, rng)
        bound = H**2 * model_transport_distance(inst, other)
        for _ in range(50):
            tree = random_policy_tree(A, inst.support, H, rng)
            gap = abs(exact_policy_value(inst, tree) - exact_policy_value(other, tree))
            assert gap <= bound + 1e-9


def test_close_instances_have_close_values():
    """Perturbaciones pequeñas de μ dan brechas de valor pequeñas."""
    rng = np.random.default_rng(14)
    inst = generate_random_instance(2, 3, 2, 3, 2, rng)
    probs = np.array(inst.probs)
    probs[:, :, 0] = np.clip(probs[:, :, 0] + 0.01, 0, 1)
    probs[:, :, 1] = 1.0 - probs[:, :, 0]
    other = LmabInstance(weights=inst.weights, horizon=3, support=inst.support, reward_probs=probs)
    assert model_transport_distance(inst, other) <= 0.02 + 1e-12
    for _ in range(20):
        tree = random_policy_tree(3, inst.support, 3, rng)
        gap = abs(exact_policy_value(inst, tree) - exact_policy_value(other, tree))
        assert gap <= 9 * 0.02 + 1e-9
