import numpy as np
import pytest

from src.planning.belief import Belief, belief_from_history, belief_update, likelihood


def test_update_worked_case(make_bernoulli):
    model = make_bernoulli([0.5, 0.5], [[0.8], [0.2]], 2)
    post = belief_update(model, Belief.prior(model), 0, 1.0)
    np.testing.assert_allclose(post.probs, [0.8, 0.2])
    assert not post.degenerate


def test_updates_commute(conflicting):
    forward = belief_from_history(conflicting, [(0, 1.0), (1, 0.0), (0, 0.0)])
    backward = belief_from_history(conflicting, [(0, 0.0), (1, 0.0), (0, 1.0)])
    np.testing.assert_allclose(forward.probs, backward.probs, atol=1e-12)


def test_zero_likelihood_gives_uniform_degenerate(make_bernoulli):
    model = make_bernoulli([0.3, 0.7], [[0.0], [0.0]], 2)
    post = belief_update(model, Belief.prior(model), 0, 1.0)
    np.testing.assert_allclose(post.probs, [0.5, 0.5])
    assert post.degenerate


def test_belief_validation():
    with pytest.raises(ValueError):
        Belief(np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        Belief(np.array([]))


def test_belief_key_rounds():
    b = Belief(np.array([1 / 3, 2 / 3]))
    assert b.key(3) == (0.333, 0.667)


def test_likelihood_discrete(conflicting):
    np.testing.assert_allclose(likelihood(conflicting, 1, 0.0), [0.9, 0.1])
