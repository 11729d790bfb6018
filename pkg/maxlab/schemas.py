import hashlib
import json
from datetime import datetime
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, TypeAdapter, ValidationError, field_validator, model_validator

from .errors import InvalidFunctionError
from .services.functions import (
    DiscreteBVFunction,
    OperatorVariant,
    PiecewiseLinearFunction,
    Side,
    StepFunction,
)
from .services.scalar import ScalarMode, parse_scalar, to_text

ScalarText = Union[str, float, int]

# Wide cores are written as runs instead of expanded values
RUNS_THRESHOLD = 256


# === Function payloads ===

class DiscreteFunctionPayload(BaseModel):
    kind: Literal["discrete"] = "discrete"
    mode: ScalarMode = ScalarMode.RATIONAL
    core_lo: int
    core_values: Optional[List[ScalarText]] = None
    runs: Optional[List[Tuple[ScalarText, int]]] = None
    left_tail: ScalarText = "0/1"
    right_tail: ScalarText = "0/1"

    @model_validator(mode="after")
    def _one_core_form(self):
        if (self.core_values is None) == (self.runs is None):
            raise ValueError("give exactly one of core_values or runs")
        return self

    def to_function(self) -> DiscreteBVFunction:
        p = lambda v: parse_scalar(v, self.mode)
        if self.runs is not None:
            runs = [(p(v), n) for v, n in self.runs]
        else:
            runs = [(p(v), 1) for v in self.core_values]
        return DiscreteBVFunction.from_runs(self.core_lo, runs, p(self.left_tail), p(self.right_tail), self.mode)


class StepFunctionPayload(BaseModel):
    kind: Literal["step"] = "step"
    mode: ScalarMode = ScalarMode.RATIONAL
    breakpoints: List[ScalarText] = []
    piece_values: List[ScalarText]

    def to_function(self) -> StepFunction:
        p = lambda v: parse_scalar(v, self.mode)
        return StepFunction.create([p(t) for t in self.breakpoints], [p(v) for v in self.piece_values], self.mode)


class PwlFunctionPayload(BaseModel):
    kind: Literal["pwl"] = "pwl"
    mode: ScalarMode = ScalarMode.RATIONAL
    nodes: List[Tuple[ScalarText, ScalarText]]

    def to_function(self) -> PiecewiseLinearFunction:
        p = lambda v: parse_scalar(v, self.mode)
        return PiecewiseLinearFunction.create([(p(x), p(y)) for x, y in self.nodes], self.mode)


FunctionPayload = Annotated[
    Union[DiscreteFunctionPayload, StepFunctionPayload, PwlFunctionPayload],
    Field(discriminator="kind"),
]

_function_adapter = TypeAdapter(FunctionPayload)


def load_function(data: Dict[str, Any]):
    """Parse a JSON object into one of the three function types."""
    try:
        payload = _function_adapter.validate_python(data)
    except ValidationError as e:
        raise InvalidFunctionError(f"invalid function payload: {e.errors()[0]['msg']}")
    return payload.to_function()


def dump_function(f) -> Dict[str, Any]:
    if isinstance(f, DiscreteBVFunction):
        data = {
            "kind": "discrete",
            "mode": f.mode.value,
            "core_lo": f.core_lo,
            "left_tail": to_text(f.left_tail),
            "right_tail": to_text(f.right_tail),
        }
        if f.width > RUNS_THRESHOLD:
            data["runs"] = [[to_text(v), n] for v, n in f.runs]
        else:
            data["core_values"] = [to_text(v) for v in f.core_values]
        return data
    if isinstance(f, StepFunction):
        return {
            "kind": "step",
            "mode": f.mode.value,
            "breakpoints": [to_text(t) for t in f.breakpoints],
            "piece_values": [to_text(v) for v in f.piece_values],
        }
    if isinstance(f, PiecewiseLinearFunction):
        return {
            "kind": "pwl",
            "mode": f.mode.value,
            "nodes": [[to_text(x), to_text(y)] for x, y in f.nodes],
        }
    raise InvalidFunctionError(f"cannot serialise {type(f).__name__}")


def function_digest(f) -> str:
    """sha256 of the canonical JSON form; equal functions share a digest."""
    canonical = json.dumps(dump_function(f), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def json_value(value) -> Any:
    """Report cell: exact rationals as "p/q", everything else as a float."""
    if isinstance(value, Fraction):
        return to_text(value)
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    return float(value)


# === Run configuration ===

class RunConfig(BaseModel):
    command: str
    target: Optional[str] = None
    centered: bool = False
    beta: str = "0"
    side: Side = Side.TWO_SIDED
    mode: ScalarMode = ScalarMode.RATIONAL
    seed: int = 42
    j_max: int = Field(20, ge=1)
    trials: int = Field(100, ge=1)
    grid_step: float = Field(1e-3, gt=0)
    threshold: Optional[float] = Field(None, gt=0)
    family: Optional[str] = None
    out: Optional[str] = None
    format: Literal["csv", "json", "both"] = "both"

    @field_validator("beta")
    @classmethod
    def _beta_in_range(cls, value: str) -> str:
        try:
            beta = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"beta must be a number, got {value!r}")
        if not 0 <= beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {value}")
        return value

    def beta_value(self):
        return parse_scalar(self.beta, self.mode)

    def variant(self) -> OperatorVariant:
        return OperatorVariant(centered=self.centered, beta=self.beta_value(), side=self.side)


# === Reports ===

class CheckReport(BaseModel):
    check: str
    instance_digest: str
    verdict: str  # pass, fail, not-applicable
    violations: List[Dict[str, Any]] = []
    details: Dict[str, Any] = {}

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"


class ExperimentReport(BaseModel):
    name: str
    parameters: Dict[str, Any] = {}
    rows: List[Dict[str, Any]] = []
    verdict: str
    decision_rule: str = ""
    summary: Dict[str, Any] = {}
    metadata: Dict[str, Any] = {}


# === Persisted records ===

class CandidateViolationOut(BaseModel):
    id: int
    run_id: int
    check: str
    instance_digest: str
    instance_json: str
    detail_json: str
    reviewed: bool
    created_at: Optional[datetime] = None

    class Config:
        from_attributes = True
