# tests/cli/conftest.py
import json

import numpy as np
import pytest

from src.cli import main
from src.model.policies import random_policy_tree
from src.storage.instance_store import read_instance, write_policy


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    code = main(["gen-instance", "--m", "2", "--a", "3", "--h", "3", "--seed", "8", "--out", str(path)])
    assert code == 0
    return path


@pytest.fixture
def policy_file(tmp_path, instance_file):
    inst = read_instance(instance_file)
    tree = random_policy_tree(inst.A, inst.support, inst.H, np.random.default_rng(9))
    return write_policy(tree, inst.A, tmp_path / "pol.json")


@pytest.fixture
def run_config(tmp_path):
    def make(**fields):
        payload = {
            "generator": {"m": 2, "a": 3, "h": 3, "seed": 5},
            "n0": 2000,
            "n1": 50,
            "n": 2000,
            "eval_episodes": 200,
            "selection_episodes": 100,
            "restarts": 1,
        }
        payload.update(fields)
        path = tmp_path / "run.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return make
