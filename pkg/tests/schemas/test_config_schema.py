import pytest
from pydantic import ValidationError

from src.schemas.config_schema import (
    PIPELINES,
    GeneratorParams,
    RunConfigSchema,
    SweepConfigSchema,
    SweepSpec,
)


def test_defaults():
    cfg = RunConfigSchema(generator=GeneratorParams(m=2, a=3, h=3))
    assert cfg.pipeline == "ed-mle"
    assert cfg.delta_sub == "auto" and cfg.delta_tsr == "auto"
    assert cfg.w_min is None
    assert not cfg.oracle


def test_exactly_one_instance_source():
    with pytest.raises(ValidationError):
        RunConfigSchema()
    with pytest.raises(ValidationError):
        RunConfigSchema(instance_path="x.json", generator=GeneratorParams(m=2, a=3, h=3))


def test_unknown_fields_are_rejected():
    with pytest.raises(ValidationError):
        RunConfigSchema(instance_path="x.json", budget=10)
    with pytest.raises(ValidationError):
        GeneratorParams(m=2, a=3, h=3, colour="red")


@pytest.mark.parametrize("value", [0.0, -1e-3])
def test_delta_must_be_positive(value):
    with pytest.raises(ValidationError):
        RunConfigSchema(instance_path="x.json", delta_tsr=value)


def test_delta_accepts_number_or_auto():
    cfg = RunConfigSchema(instance_path="x.json", delta_sub=1e-3, delta_tsr="auto")
    assert cfg.delta_sub == pytest.approx(1e-3)


def test_unknown_pipeline_rejected():
    with pytest.raises(ValidationError):
        RunConfigSchema(instance_path="x.json", pipeline="random-search")
    assert "algorithm1-moments" in PIPELINES


def test_negative_budget_rejected():
    with pytest.raises(ValidationError):
        RunConfigSchema(instance_path="x.json", n0=-1)


def test_sweep_defaults():
    plan = SweepSpec()
    assert plan.vary == "h"
    assert plan.grid == list(range(2, 10))
    assert plan.reps == 10


def test_sweep_validation():
    with pytest.raises(ValidationError):
        SweepSpec(grid=[])
    with pytest.raises(ValidationError):
        SweepSpec(vary="a")
    with pytest.raises(ValidationError):
        SweepSpec(grid=[-1, 2])
    cfg = SweepConfigSchema(base={"instance_path": "x.json"})
    assert cfg.sweep.pipelines == ["ed-mle", "ucb", "genie"]
