import numpy as np
import pytest

from src.errors import EnumerationGuardError
from src.model.instance import LmabInstance
from src.model.oracles import (
    exact_open_loop_value,
    exact_policy_value,
    exact_trajectory_distribution,
    total_variation,
)
from src.model.policies import (
    OpenLoopPolicy,
    PolicyTree,
    enumerate_policy_trees,
    random_policy_tree,
)
from src.model.simulator import monte_carlo_policy_value
from src.moments.wasserstein import model_transport_distance


def test_open_loop_value_by_hand(tiny_instance):
    # media de la mezcla en a0: 0.3·0.8 + 0.7·0.4 = 0.52
    assert exact_open_loop_value(tiny_instance, (0, 0, 0)) == pytest.approx(1.56)
    # a1: 0.3·0.1 + 0.7·0.7 = 0.52 también
    assert exact_open_loop_value(tiny_instance, (1, 0, 1)) == pytest.approx(1.56)


def test_tree_and_open_loop_agree(tiny_instance):
    """Un árbol que ignora las recompensas vale lo mismo que la secuencia fija."""
    tree = PolicyTree.from_policy(OpenLoopPolicy((1, 0, 1)), tiny_instance.support, 3)
    assert exact_policy_value(tiny_instance, tree) == pytest.approx(
        exact_open_loop_value(tiny_instance, (1, 0, 1)), abs=1e-12
    )


def test_trajectory_distribution_is_consistent(random_instance):
    rng = np.random.default_rng(3)
    tree = random_policy_tree(random_instance.A, random_instance.support, 3, rng)
    dist = exact_trajectory_distribution(random_instance, tree)

    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    expected = sum(p * sum(rewards) for (_, rewards), p in dist.items())
    assert exact_policy_value(random_instance, tree) == pytest.approx(expected, abs=1e-12)
    assert total_variation(dist, dist) == 0.0


def test_perturbed_instance_tv_within_transport_bound(random_instance):
    """TV(ℙ^π, ℙ̂^π) ≤ H·OT(w, ŵ; max_a ‖μ_m(a,·) − μ̂_{m′}(a,·)‖₁) para árboles aleatorios."""
    rng = np.random.default_rng(91)
    inst = random_instance
    for _ in range(10):
        probs = inst.reward_probs + rng.uniform(0.0, 0.1, size=inst.reward_probs.shape)
        weights = inst.weights + rng.uniform(0.0, 0.1, size=inst.M)
        other = LmabInstance(
            weights=weights / weights.sum(),
            horizon=inst.H,
            support=inst.support,
            reward_probs=probs / probs.sum(axis=-1, keepdims=True),
        )
        bound = inst.H * model_transport_distance(inst, other)
        tree = random_policy_tree(inst.A, inst.support, inst.H, rng)
        tv = total_variation(
            exact_trajectory_distribution(inst, tree), exact_trajectory_distribution(other, tree)
        )
        assert 0.0 < tv <= bound + 1e-12


def test_monte_carlo_within_five_stderr(random_instance, rng):
    tree = random_policy_tree(random_instance.A, random_instance.support, 3, rng)
    exact = exact_policy_value(random_instance, tree)
    est = monte_carlo_policy_value(random_instance, tree, 20_000, rng)

    assert est.episodes == 20_000
    assert abs(est.mean - exact) <= 5 * est.stderr


def test_monte_carlo_open_loop(tiny_instance, rng):
    est = monte_carlo_policy_value(tiny_instance, (0, 1, 0), 20_000, rng)
    assert abs(est.mean - 1.56) <= 5 * est.stderr


def test_enumeration_guard(tiny_instance):
    tree = PolicyTree.from_policy(OpenLoopPolicy((0, 0, 0)), tiny_instance.support, 3)
    with pytest.raises(EnumerationGuardError):
        exact_policy_value(tiny_instance, tree, guard=4)


def test_short_policy_rejected(tiny_instance):
    with pytest.raises(ValueError):
        exact_policy_value(tiny_instance, (0, 1))


def test_enumerate_policy_trees_count(tiny_instance):
    # depth 2 → 3 nodos → 2^3 árboles
    trees = list(enumerate_policy_trees(2, tiny_instance.support, 2))
    assert len(trees) == 8
    assert len({t.compile().actions.tobytes() for t in trees}) == 8


def test_enumerate_policy_trees_limit(tiny_instance):
    with pytest.raises(ValueError):
        list(enumerate_policy_trees(3, tiny_instance.support, 3, limit=100))
