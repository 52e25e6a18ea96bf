import json

import numpy as np
import pytest

from src.errors import ConfigError
from src.generators.instance_generator import (
    generate_random_gaussian_instance,
    generate_random_instance,
)
from src.model.policies import random_policy_tree
from src.storage.instance_store import (
    load_run_config,
    load_sweep_config,
    read_instance,
    read_policy,
    write_instance,
    write_policy,
    write_report,
)


def test_instance_file_is_bit_exact(tmp_path):
    inst = generate_random_instance(3, 4, 3, 5, 2, np.random.default_rng(71))
    loaded = read_instance(write_instance(inst, tmp_path / "inst.json"))
    np.testing.assert_array_equal(loaded.weights, inst.weights)
    np.testing.assert_array_equal(loaded.probs, inst.probs)
    assert loaded.support == inst.support
    assert loaded.H == 5


def test_gaussian_instance_file(tmp_path):
    inst = generate_random_gaussian_instance(2, 3, 4, 2, np.random.default_rng(72))
    loaded = read_instance(write_instance(inst, tmp_path / "g.json"))
    assert loaded.is_gaussian
    np.testing.assert_array_equal(loaded.means_table, inst.means_table)


def test_policy_file(tmp_path):
    inst = generate_random_instance(2, 3, 2, 3, 2, np.random.default_rng(73))
    tree = random_policy_tree(3, inst.support, 3, np.random.default_rng(74))
    loaded = read_policy(write_policy(tree, 3, tmp_path / "pol.json"))
    np.testing.assert_array_equal(loaded.compile().actions, tree.compile().actions)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        read_instance(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_instance(bad)


def test_schema_violation_is_config_error(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps({"m": 1, "a": 1, "z": 2, "h": 1, "weights": [1.0]}), encoding="utf-8")
    with pytest.raises(ConfigError):
        read_instance(path)


def test_run_config_overrides(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"instance_path": "i.json", "n": 10, "seed": 1}), encoding="utf-8")
    cfg = load_run_config(path, {"n": 99, "seed": None})
    assert cfg.n == 99
    assert cfg.seed == 1


def test_run_config_without_file():
    cfg = load_run_config(None, {"instance_path": "i.json", "pipeline": "genie"})
    assert cfg.pipeline == "genie"
    with pytest.raises(ConfigError):
        load_run_config(None, {})


def test_instance_flag_replaces_file_generator(tmp_path):
    """--instance sobre un fichero con generator: gana la fuente del CLI."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"generator": {"m": 2, "a": 3, "h": 3}, "n": 10}), encoding="utf-8")
    cfg = load_run_config(path, {"instance_path": "i.json"})
    assert cfg.instance_path == "i.json"
    assert cfg.generator is None
    assert cfg.n == 10


def test_file_with_both_sources_still_rejected(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps({"generator": {"m": 2, "a": 3, "h": 3}, "instance_path": "i.json"}),
        encoding="utf-8",
    )
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_run_config_rejects_bad_values(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"instance_path": "i.json", "delta_sub": -1.0}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_sweep_config_accepts_plain_run_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"instance_path": "i.json"}), encoding="utf-8")
    cfg = load_sweep_config(path, {"seed": 9}, {"vary": "n", "grid": [0, 10], "reps": None})
    assert cfg.base.seed == 9
    assert cfg.sweep.vary == "n" and cfg.sweep.grid == [0, 10]
    assert cfg.sweep.reps == 10


def test_write_report(tmp_path):
    path = write_report({"per_step_reward": 0.5, "flags": []}, tmp_path / "out" / "r.json")
    assert json.loads(path.read_text(encoding="utf-8"))["per_step_reward"] == 0.5
