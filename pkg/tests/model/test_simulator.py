import numpy as np
import pytest

from src.model.policies import OpenLoopPolicy, PolicyNode, PolicyTree
from src.model.simulator import LmabEnvironment, sample_episode


def test_sample_episode_shape(tiny_instance, rng):
    ep = sample_episode(tiny_instance, (0, 1, 0), rng)
    assert ep.actions == (0, 1, 0)
    assert len(ep.rewards) == 3
    assert set(ep.rewards) <= {0.0, 1.0}
    # la vista del aprendiz no expone el contexto
    assert not hasattr(ep.learner_view(), "context")


def test_first_reward_histogram_within_hoeffding_band(tiny_instance):
    """10⁵ episodios con a fija en t=1: histograma a √(ln(2Z/δ)/2N) de Σ_m w_m μ_m(a,·), δ=10⁻³."""
    rng = np.random.default_rng(77)
    N, a = 100_000, 1
    policy = OpenLoopPolicy((a, 0, 0))
    first = np.array([sample_episode(tiny_instance, policy, rng).rewards[0] for _ in range(N)])
    support = tiny_instance.support.array
    freqs = np.array([(first == z).mean() for z in support])
    expected = tiny_instance.weights @ tiny_instance.reward_probs[:, a, :]
    band = np.sqrt(np.log(2 * tiny_instance.Z / 1e-3) / (2 * N))
    assert np.abs(freqs - expected).max() <= band


def test_environment_counts_episodes(tiny_instance, rng):
    env = LmabEnvironment(tiny_instance)
    env.sample_open_loop(np.zeros((50, 2), dtype=int), rng)
    env.rollout(OpenLoopPolicy((0, 0, 0)), rng)
    env.open_session(rng)
    assert env.episodes_used == 52


def test_sample_open_loop_returns_support_indices(tiny_instance, rng):
    env = LmabEnvironment(tiny_instance)
    idx = env.sample_open_loop(np.ones((1000, 3), dtype=int), rng)
    assert idx.shape == (1000, 3)
    assert set(np.unique(idx)) <= {0, 1}
    # frecuencia de z=1 en a1 ≈ 0.52
    assert abs(idx.mean() - 0.52) < 0.06


def test_sample_open_loop_rejects_long_sequences(tiny_instance, rng):
    env = LmabEnvironment(tiny_instance)
    with pytest.raises(ValueError):
        env.sample_open_loop(np.zeros((2, 4), dtype=int), rng)
    assert env.episodes_used == 0


def test_session_overflow_raises(tiny_instance, rng):
    session = LmabEnvironment(tiny_instance).open_session(rng)
    for _ in range(3):
        session.step(0)
    with pytest.raises(RuntimeError):
        session.step(0)


def test_policy_tree_follows_rewards(tiny_instance):
    leaf0, leaf1 = PolicyNode(0), PolicyNode(1)
    tree = PolicyTree(
        PolicyNode(0, (PolicyNode(1, (leaf0, leaf1)), PolicyNode(0, (leaf1, leaf0)))),
        tiny_instance.support,
        3,
    )
    assert tree.act([]) == 0
    assert tree.act([(0, 1.0)]) == 0
    assert tree.act([(0, 0.0), (1, 1.0)]) == 1
    assert tree.node_count == 7


def test_policy_tree_rejects_bad_shape(tiny_instance):
    with pytest.raises(ValueError):
        PolicyTree(PolicyNode(0, (PolicyNode(1),)), tiny_instance.support, 2)
