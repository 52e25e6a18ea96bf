import pytest
from pydantic import ValidationError

from src.schemas.instance_schema import InstanceDocument, PolicyTreeDocument


def _doc(**overrides):
    fields = {
        "m": 1,
        "a": 2,
        "z": 2,
        "h": 3,
        "weights": [1.0],
        "support": [0.0, 1.0],
        "reward_probs": [[[0.3, 0.7], [0.5, 0.5]]],
    }
    fields.update(overrides)
    return fields


def test_valid_document_builds_instance():
    inst = InstanceDocument.model_validate(_doc()).to_instance()
    assert (inst.M, inst.A, inst.Z, inst.H) == (1, 2, 2, 3)


def test_weights_length_checked():
    with pytest.raises(ValidationError):
        InstanceDocument.model_validate(_doc(weights=[0.5, 0.5]))


def test_table_shape_checked():
    with pytest.raises(ValidationError):
        InstanceDocument.model_validate(_doc(reward_probs=[[[1.0], [1.0]]]))


def test_gaussian_document():
    doc = InstanceDocument.model_validate(
        _doc(reward_kind="gaussian", z=0, support=None, reward_probs=None, gaussian_means=[[0.1, -0.4]])
    )
    assert doc.to_instance().is_gaussian


def test_default_support_is_uniform_grid():
    inst = InstanceDocument.model_validate(
        _doc(z=3, support=None, reward_probs=[[[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]]])
    ).to_instance()
    assert inst.support.values == (0.0, 0.5, 1.0)


def test_policy_document_checks_actions():
    with pytest.raises(ValidationError):
        PolicyTreeDocument(a=2, depth=2, support=[0.0, 1.0], actions=[0, 1])
    with pytest.raises(ValidationError):
        PolicyTreeDocument(a=2, depth=2, support=[0.0, 1.0], actions=[0, 1, 2])
    tree = PolicyTreeDocument(a=2, depth=2, support=[0.0, 1.0], actions=[0, 1, 0]).to_policy()
    assert tree.act([(0, 0.0)]) == 1
    assert tree.act([(0, 1.0)]) == 0
