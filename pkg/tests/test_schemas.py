from fractions import Fraction

import pytest
from pydantic import ValidationError

from maxlab.errors import InvalidFunctionError
from maxlab.schemas import RunConfig, dump_function, function_digest, json_value, load_function
from maxlab.services.functions import DiscreteBVFunction, PiecewiseLinearFunction, Side, StepFunction
from maxlab.services.scalar import ScalarMode


def test_load_discrete_values_and_runs_agree():
    by_values = load_function({"kind": "discrete", "core_lo": -1, "core_values": ["1/2", "1/2", 3]})
    by_runs = load_function({"kind": "discrete", "core_lo": -1, "runs": [["1/2", 2], [3, 1]]})
    assert by_values == by_runs
    assert by_values(0) == Fraction(1, 2)
    assert function_digest(by_values) == function_digest(by_runs)


def test_decimal_input_is_exact():
    f = load_function({"kind": "discrete", "core_lo": 0, "core_values": ["0.1"]})
    assert f(0) == Fraction(1, 10)
    g = load_function({"kind": "discrete", "mode": "f64", "core_lo": 0, "core_values": ["0.1"]})
    assert g(0) == 0.1


@pytest.mark.parametrize("payload", [
    {"kind": "discrete", "core_lo": 0},
    {"kind": "discrete", "core_lo": 0, "core_values": [1], "runs": [[1, 1]]},
    {"kind": "wavelet", "coefficients": [1]},
    {"kind": "step", "breakpoints": [0, 1], "piece_values": [0, 1]},
    {"kind": "pwl", "nodes": [[1, 0], [0, 1]]},
])
def test_invalid_payloads(payload):
    with pytest.raises(InvalidFunctionError):
        load_function(payload)


def test_dump_then_load_keeps_the_function(unit_step, tent):
    for f in (unit_step, tent, DiscreteBVFunction.from_runs(2, [(1, 3), (-1, 1)], Fraction(1, 3), 0)):
        assert load_function(dump_function(f)) == f


def test_wide_cores_are_dumped_as_runs():
    wide = DiscreteBVFunction.indicator(0, 999)
    data = dump_function(wide)
    assert "core_values" not in data
    assert data["runs"] == [["1/1", 1000]]
    narrow = dump_function(DiscreteBVFunction.indicator(0, 2))
    assert narrow["core_values"] == ["1/1", "1/1", "1/1"]


def test_digest_distinguishes_functions(delta):
    assert function_digest(delta) != function_digest(delta.scale(2))
    assert function_digest(StepFunction.indicator(0, 1)) != function_digest(PiecewiseLinearFunction.tent())


def test_json_value():
    assert json_value(Fraction(3, 4)) == "3/4"
    assert json_value(Fraction(2)) == "2/1"
    assert json_value(0.5) == 0.5
    assert json_value(3) == 3
    assert json_value(None) is None


def test_run_config_variant():
    cfg = RunConfig(command="compute", beta="1/3", centered=True, side="right", mode="f64")
    assert cfg.beta_value() == pytest.approx(1 / 3)
    variant = cfg.variant()
    assert variant.centered
    assert variant.side is Side.RIGHT
    assert RunConfig(command="compute", beta="0.25").beta_value() == Fraction(1, 4)
    assert RunConfig(command="compute").mode is ScalarMode.RATIONAL


@pytest.mark.parametrize("beta", ["1", "-1/2", "abc", "1/0"])
def test_run_config_rejects_beta(beta):
    with pytest.raises(ValidationError):
        RunConfig(command="compute", beta=beta)


def test_run_config_rejects_nonpositive_counts():
    with pytest.raises(ValidationError):
        RunConfig(command="fuzz", trials=0)
    with pytest.raises(ValidationError):
        RunConfig(command="converge", grid_step=0)
