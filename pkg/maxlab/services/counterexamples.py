"""
Counterexample sequences for fractional maximal operators.

Every sequence has the form ``f_j = base + (1/(2j)) * chi_[0, h_j]`` where
``h_j`` is the first strict record of a closed-form window value. The window
values are unimodal in the radius, so record searches reduce to a short scan
followed by an exact galloping search. Verifiers recompute everything with the
optimizers of maxdisc / maxcont and never consult the record searches.
"""

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..errors import DomainError, VerificationError
from ..schemas import ExperimentReport, json_value
from .functions import (
    DiscreteBVFunction,
    OperatorVariant,
    StepFunction,
    delta_at_origin,
)
from .maxcont import step_max_continuous
from .maxdisc import DiscreteWindow, maximal_discrete
from .scalar import ScalarMode, compare, fractional_average, power_value
from .variation import SampledProfile, bvnorm_continuous, bvnorm_discrete, varq_riesz

logger = logging.getLogger(__name__)

# float64 cross-checks and closed-form comparisons
FLOAT_TOL = 1e-12
FORMULA_TOL = 1e-9


class RecordFamily(str, enum.Enum):
    L = "L"
    F = "F"
    G = "G"
    F_CONT = "F_cont"
    F_CONT_CENTERED = "F_cont_centered"
    G_CONT = "G_cont"


DISCRETE_FAMILIES = (RecordFamily.L, RecordFamily.F, RecordFamily.G)


@dataclass(frozen=True)
class RecordFunction:
    """
    ``value(s) = (kappa*s + iota)**(beta-1) * (alpha*s + gamma)``.

    L:  (s+1)^(b-1) ((s+1)/(2j) + 1)       F:  (2s+1)^(b-1) ((s+1)/(2j) + 1)
    G:  (2s+1)^(b-1) ((s+2)/(2j) + 1)      F_cont: s^(b-1) (1 + s/(2j))
    F_cont_centered: (2s)^(b-1) (s/(2j) + 1)
    G_cont: (2s)^(b-1) ((s+2)/(2j) + 1)
    """

    family: RecordFamily
    j: int
    beta: Any

    def __post_init__(self):
        if self.j < 1:
            raise DomainError(f"j must be at least 1, got {self.j}")
        if not 0 < self.beta < 1:
            raise DomainError(f"record functions need 0 < beta < 1, got {self.beta}")

    @property
    def shape(self) -> Tuple[int, int, Any, Any]:
        half = 1 / (2.0 * self.j) if isinstance(self.beta, float) else Fraction(1, 2 * self.j)
        return {
            RecordFamily.L: (1, 1, half, 1 + half),
            RecordFamily.F: (2, 1, half, 1 + half),
            RecordFamily.G: (2, 1, half, 1 + 2 * half),
            RecordFamily.F_CONT: (1, 0, half, 1),
            RecordFamily.F_CONT_CENTERED: (2, 0, half, 1),
            RecordFamily.G_CONT: (2, 0, half, 1 + 2 * half),
        }[self.family]

    def __call__(self, s):
        kappa, iota, alpha, gamma = self.shape
        base = kappa * s + iota
        if base <= 0:
            raise DomainError(f"{self.family.value} is undefined at s={s}")
        return fractional_average(alpha * s + gamma, base, self.beta)

    def turning_point(self):
        """
        Minimiser of the unimodal value in s (``None`` when it is increasing throughout).

        With b = kappa*s + iota the value is A b^beta + Gamma b^(beta-1), which
        decreases up to b* = Gamma (1-beta) / (A beta) and increases afterwards.
        """
        kappa, iota, alpha, gamma = self.shape
        a = alpha / kappa
        g = gamma - alpha * iota / kappa
        if g <= 0:
            return None
        b_star = g * (1 - self.beta) / (a * self.beta)
        return (b_star - iota) / kappa


def _first_true(pred: Callable[[int], bool], start: int, monotone_from: int, limit: int = 1 << 62) -> int:
    """Smallest m >= start with pred(m); pred is monotone (false, then true) from ``monotone_from``."""
    m = start
    while m < monotone_from:
        if pred(m):
            return m
        m += 1
    if pred(m):
        return m
    lo, step = m, 1
    while True:
        hi = m + step
        if hi > limit:
            raise DomainError("record search exceeded its limit")
        if pred(hi):
            break
        lo, step = hi, step * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _is_record(rf: RecordFunction, m: int) -> bool:
    # quasi-convex on [0, m-1]: its maximum sits at an end
    if m == 0:
        return True
    v = rf(m)
    if compare(v, rf(0)) <= 0:
        return False
    return m == 1 or compare(v, rf(m - 1)) > 0


def _increasing_from(rf: RecordFunction) -> int:
    turning = rf.turning_point()
    return 0 if turning is None or turning < 0 else math.ceil(turning) + 1


def first_strict_record(rf: RecordFunction, lower_bound: int) -> int:
    """Smallest m > lower_bound with rf(m) > max(rf(0), ..., rf(m-1))."""
    if rf.family not in DISCRETE_FAMILIES:
        raise DomainError(f"{rf.family.value} is not a discrete record family")
    if lower_bound < 0:
        raise DomainError("lower bound must be non-negative")
    start = lower_bound + 1
    return _first_true(lambda m: _is_record(rf, m), start, max(start, _increasing_from(rf)))


def scan_strict_record(rf: RecordFunction, lower_bound: int, limit: int = 1_000_000) -> int:
    """Direct scan with a running maximum; the reference for ``first_strict_record``."""
    best = rf(0)
    for s in range(1, lower_bound + 1):
        v = rf(s)
        if compare(v, best) > 0:
            best = v
    for m in range(max(1, lower_bound + 1), limit + 1):
        v = rf(m)
        if compare(v, best) > 0:
            return m
    raise DomainError(f"no strict record up to {limit}")


class Setting(str, enum.Enum):
    THM3 = "thm3"
    THM4 = "thm4"
    THM5 = "thm5"
    THM6 = "thm6"


# h_1 must exceed these
LOWER_BOUNDS = {Setting.THM3: 2, Setting.THM4: 2, Setting.THM5: 0, Setting.THM6: 0}


def _unimodal_height(setting: Setting, j: int, beta, previous: int) -> int:
    start = max(previous, LOWER_BOUNDS[setting]) + 1
    if setting is Setting.THM5:
        return first_strict_record(RecordFunction(RecordFamily.L, j, beta), start - 1)
    if setting is Setting.THM6:
        rf = RecordFunction(RecordFamily.F, j, beta)
        rg = RecordFunction(RecordFamily.G, j, beta)
        return _first_true(
            lambda h: _is_record(rf, h) and _is_record(rg, h - 1),
            start,
            max(start, _increasing_from(rf), _increasing_from(rg) + 1),
        )
    if setting is Setting.THM3:
        rf = RecordFunction(RecordFamily.F_CONT, j, beta)
        one = rf(1)
        return _first_true(lambda h: compare(rf(h), one) > 0, start, max(start, _increasing_from(rf)))
    rf = RecordFunction(RecordFamily.F_CONT_CENTERED, j, beta)
    rg = RecordFunction(RecordFamily.G_CONT, j, beta)
    f_one, g_two = rf(1), rg(2)
    return _first_true(
        lambda h: h - 2 > 2 and compare(rf(h), f_one) > 0 and compare(rg(h - 2), g_two) > 0,
        max(start, 5),
        max(start, 5, _increasing_from(rf), _increasing_from(rg) + 2),
    )


def _base_function(setting: Setting, mode: ScalarMode):
    if setting in (Setting.THM5, Setting.THM6):
        return delta_at_origin(mode)
    one = Fraction(1) if mode is ScalarMode.RATIONAL else 1.0
    return StepFunction.indicator(0 * one, one, one, mode)


def _member(setting: Setting, base, j: int, h: int):
    bump = Fraction(1, 2 * j) if base.mode is ScalarMode.RATIONAL else 1 / (2.0 * j)
    return base.add_indicator(0, h, bump)


def _witness_ok(setting: Setting, j: int, beta, h: int, mode: ScalarMode) -> bool:
    """The record property read off the optimizers' witnesses."""
    base = _base_function(setting, mode)
    f = _member(setting, base, j, h)
    if setting is Setting.THM5:
        return maximal_discrete(f, 0, OperatorVariant(beta=beta)).window == DiscreteWindow(0, h)
    if setting is Setting.THM6:
        v = OperatorVariant(centered=True, beta=beta)
        return (
            maximal_discrete(f, 0, v).window == DiscreteWindow(-h, h)
            and maximal_discrete(f, 1, v).window == DiscreteWindow(2 - h, h)
        )
    if setting is Setting.THM3:
        w = step_max_continuous(f, 0, OperatorVariant(beta=beta)).window
        return w is not None and (w.L, w.R) == (0, h)
    v = OperatorVariant(centered=True, beta=beta)
    w0 = step_max_continuous(f, 0, v).window
    w2 = step_max_continuous(f, 2, v).window
    return w0 is not None and w2 is not None and (w0.L, w0.R) == (-h, h) and (w2.L, w2.R) == (4 - h, h)


def search_by_verification(setting: Setting, j: int, beta, previous: int, limit: int = 100_000,
                           mode: ScalarMode = ScalarMode.RATIONAL) -> int:
    """Verify-and-increment: the first h whose optimizer witnesses show the record."""
    h = max(previous, LOWER_BOUNDS[setting]) + 1
    if setting is Setting.THM4:
        h = max(h, 5)
    while h <= limit:
        if _witness_ok(setting, j, beta, h, mode):
            return h
        h += 1
    raise DomainError(f"no verified height for {setting.value} j={j} up to {limit}")


@dataclass(frozen=True)
class CounterexamplePair:
    """A sequence ``f_j = base + (1/(2j)) chi_[0, h_j]``, j = 1..len(heights)."""

    setting: Setting
    beta: Any
    base: Any
    heights: Tuple[int, ...]
    strategy: str = "unimodal"

    @property
    def lower_bound(self) -> int:
        return LOWER_BOUNDS[self.setting]

    def height(self, j: int) -> int:
        if not 1 <= j <= len(self.heights):
            raise DomainError(f"j={j} outside 1..{len(self.heights)}")
        return self.heights[j - 1]

    def member(self, j: int):
        return _member(self.setting, self.base, j, self.height(j))


def build_sequence(
    setting: Setting,
    beta,
    j_max: int,
    strategy: str = "unimodal",
    mode: ScalarMode = ScalarMode.RATIONAL,
) -> CounterexamplePair:
    """Chain the record searches for j = 1..j_max (each h_j exceeds h_{j-1})."""
    if j_max < 1:
        raise DomainError(f"j_max must be at least 1, got {j_max}")
    if not 0 < beta < 1:
        raise DomainError(f"counterexamples need 0 < beta < 1, got {beta}")
    if strategy not in ("unimodal", "verify"):
        raise DomainError(f"unknown search strategy {strategy!r}")
    heights: List[int] = []
    previous = 0
    for j in range(1, j_max + 1):
        if strategy == "unimodal":
            h = _unimodal_height(setting, j, beta, previous)
        else:
            h = search_by_verification(setting, j, beta, previous, mode=mode)
        logger.info("%s beta=%s j=%d: h=%d", setting.value, beta, j, h)
        heights.append(h)
        previous = h
    return CounterexamplePair(setting, beta, _base_function(setting, mode), tuple(heights), strategy)


def build_thm5(j: int, beta) -> Tuple[DiscreteBVFunction, int]:
    pair = build_sequence(Setting.THM5, beta, j)
    return pair.member(j), pair.height(j)


def build_thm6(j: int, beta) -> Tuple[DiscreteBVFunction, int]:
    pair = build_sequence(Setting.THM6, beta, j)
    return pair.member(j), pair.height(j)


def build_thm3(j: int, beta) -> Tuple[StepFunction, int]:
    pair = build_sequence(Setting.THM3, beta, j)
    return pair.member(j), pair.height(j)


def build_thm4(j: int, beta) -> Tuple[StepFunction, int]:
    pair = build_sequence(Setting.THM4, beta, j)
    return pair.member(j), pair.height(j)


class _Checks:
    def __init__(self):
        self.items: List[Dict[str, Any]] = []

    def add(self, name: str, ok: bool, **detail: Any) -> None:
        self.items.append({"name": name, "ok": bool(ok), **{k: json_value(v) for k, v in detail.items()}})

    @property
    def passed(self) -> bool:
        return all(item["ok"] for item in self.items)


def _finish(pair: CounterexamplePair, j: int, checks: _Checks, row: Dict[str, Any]) -> Dict[str, Any]:
    report = {
        "setting": pair.setting.value,
        "beta": json_value(pair.beta),
        "j": j,
        "h": pair.height(j),
        "passed": checks.passed,
        "checks": checks.items,
        "row": row,
    }
    if not checks.passed:
        failed = [c["name"] for c in checks.items if not c["ok"]]
        raise VerificationError(f"{pair.setting.value} j={j} failed: {', '.join(failed)}", report=report)
    return report


def _one_over(j: int, like):
    return Fraction(1, j) if not isinstance(like, float) else 1.0 / j


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def verify_thm5(pair: CounterexamplePair, j: int) -> Dict[str, Any]:
    """Uncentered discrete: equal values at 0 and 1 for every j, while the base has a gap."""
    f, h, beta = pair.member(j), pair.height(j), pair.beta
    variant = OperatorVariant(beta=beta)
    checks = _Checks()
    bv = bvnorm_discrete(f - pair.base)
    checks.add("bv-distance", compare(bv, _one_over(j, bv)) == 0, value=bv)
    b0 = maximal_discrete(pair.base, 0, variant).value
    b1 = maximal_discrete(pair.base, 1, variant).value
    checks.add("base-values", compare(b0, 1) == 0 and compare(b1, _pow(2, beta)) == 0, at_0=b0, at_1=b1)
    e0, e1 = maximal_discrete(f, 0, variant), maximal_discrete(f, 1, variant)
    checks.add("equal-values", compare(e0.value, e1.value) == 0, at_0=e0.value, at_1=e1.value)
    checks.add("witness", e0.window == (0, h) and e1.window == (0, h), window_0=str(e0.window), window_1=str(e1.window))
    gap = abs((float(e1.value) - float(e0.value)) - (float(b1) - float(b0)))
    expected = 1 - float(_pow(2, beta))
    checks.add("derivative-gap", _close(gap, expected, FLOAT_TOL), gap=gap, expected=expected)
    if not isinstance(beta, float):
        g = f.to_f64()
        fv = OperatorVariant(beta=float(beta))
        v0, v1 = float(maximal_discrete(g, 0, fv).value), float(maximal_discrete(g, 1, fv).value)
        checks.add("float-cross-check", _close(v0, v1, FLOAT_TOL), at_0=v0, at_1=v1)
    row = {
        "setting": pair.setting.value, "beta": json_value(beta), "j": j, "h": h,
        "value_0": float(e0.value), "value_1": float(e1.value),
        "derivative": float(e1.value) - float(e0.value),
        "derivative_gap": gap, "bv_distance": json_value(bv), "varq_lower_bound": gap,
    }
    return _finish(pair, j, checks, row)


def verify_thm6(pair: CounterexamplePair, j: int) -> Dict[str, Any]:
    """Centered discrete: the derivative at 0 matches its closed form and tends to 0."""
    f, h, beta = pair.member(j), pair.height(j), pair.beta
    variant = OperatorVariant(centered=True, beta=beta)
    checks = _Checks()
    bv = bvnorm_discrete(f - pair.base)
    checks.add("bv-distance", compare(bv, _one_over(j, bv)) == 0, value=bv)
    b0 = maximal_discrete(pair.base, 0, variant).value
    b1 = maximal_discrete(pair.base, 1, variant).value
    checks.add("base-values", compare(b0, 1) == 0 and compare(b1, _pow(3, beta)) == 0, at_0=b0, at_1=b1)
    e0, e1 = maximal_discrete(f, 0, variant), maximal_discrete(f, 1, variant)
    checks.add("witness", e0.window == (-h, h) and e1.window == (2 - h, h), window_0=str(e0.window), window_1=str(e1.window))
    derivative = float(e1.value) - float(e0.value)
    b = float(beta)
    formula = (1 + (h + 1) / (2 * j)) * ((2 * h - 1) ** (b - 1) - (2 * h + 1) ** (b - 1))
    checks.add("derivative-formula", _close(derivative, formula, FORMULA_TOL), derivative=derivative, formula=formula)
    base_derivative = float(b1) - float(b0)
    row = {
        "setting": pair.setting.value, "beta": json_value(beta), "j": j, "h": h,
        "value_0": float(e0.value), "value_1": float(e1.value),
        "derivative": derivative, "formula": formula, "base_derivative": base_derivative,
        "derivative_gap": abs(derivative - base_derivative), "bv_distance": json_value(bv),
    }
    return _finish(pair, j, checks, row)


def verify_thm3(pair: CounterexamplePair, j: int) -> Dict[str, Any]:
    """Uncentered continuous: equal values at 0 and 2, two-point q-variation bound."""
    f, h, beta = pair.member(j), pair.height(j), pair.beta
    variant = OperatorVariant(beta=beta)
    checks = _Checks()
    bv = bvnorm_continuous(f - pair.base)
    checks.add("bv-distance", compare(bv, _one_over(j, bv)) == 0, value=bv)
    b0 = step_max_continuous(pair.base, 0, variant).value
    b2 = step_max_continuous(pair.base, 2, variant).value
    checks.add("base-values", compare(b0, 1) == 0 and compare(b2, _pow(2, beta)) == 0, at_0=b0, at_2=b2)
    e0, e2 = step_max_continuous(f, 0, variant), step_max_continuous(f, 2, variant)
    expected = power_value(1 + Fraction(h, 2 * j), h, Fraction(beta) - 1) if not isinstance(beta, float) else (1 + h / (2 * j)) * h ** (beta - 1)
    checks.add("equal-values", compare(e0.value, e2.value) == 0 and compare(e0.value, expected) == 0,
               at_0=e0.value, at_2=e2.value)
    checks.add("witness", _window_is(e0.window, 0, h) and _window_is(e2.window, 0, h),
               window_0=str(e0.window), window_2=str(e2.window))
    diff = SampledProfile((0, 2), (float(e0.value) - float(b0), float(e2.value) - float(b2)))
    q = 1 / (1 - float(beta))
    bound = varq_riesz(diff, q)
    delta = 1 - float(_pow(2, beta))
    closed = (abs(delta) ** q / 2 ** (q - 1)) ** (1 / q)
    checks.add("two-point-bound", _close(bound, closed, FORMULA_TOL), bound=bound, closed_form=closed)
    row = {
        "setting": pair.setting.value, "beta": json_value(beta), "j": j, "h": h,
        "value_0": float(e0.value), "value_2": float(e2.value),
        "derivative_gap": abs(delta), "bv_distance": json_value(bv), "varq_lower_bound": bound,
    }
    return _finish(pair, j, checks, row)


def verify_thm4(pair: CounterexamplePair, j: int) -> Dict[str, Any]:
    """Centered continuous: the difference between 2 and 0 matches its closed form and tends to 0."""
    f, h, beta = pair.member(j), pair.height(j), pair.beta
    variant = OperatorVariant(centered=True, beta=beta)
    checks = _Checks()
    bv = bvnorm_continuous(f - pair.base)
    checks.add("bv-distance", compare(bv, _one_over(j, bv)) == 0, value=bv)
    b0 = step_max_continuous(pair.base, 0, variant).value
    b2 = step_max_continuous(pair.base, 2, variant).value
    checks.add("base-values", compare(b0, _pow(2, beta)) == 0 and compare(b2, _pow(4, beta)) == 0, at_0=b0, at_2=b2)
    e0, e2 = step_max_continuous(f, 0, variant), step_max_continuous(f, 2, variant)
    checks.add("witness", _window_is(e0.window, -h, h) and _window_is(e2.window, 4 - h, h),
               window_0=str(e0.window), window_2=str(e2.window))
    difference = float(e2.value) - float(e0.value)
    b = float(beta)
    formula = (1 + h / (2 * j)) * ((2 * h - 4) ** (b - 1) - (2 * h) ** (b - 1))
    checks.add("difference-formula", _close(difference, formula, FORMULA_TOL), difference=difference, formula=formula)
    base_difference = float(b2) - float(b0)
    row = {
        "setting": pair.setting.value, "beta": json_value(beta), "j": j, "h": h,
        "value_0": float(e0.value), "value_2": float(e2.value),
        "derivative": difference, "formula": formula, "base_derivative": base_difference,
        "derivative_gap": abs(difference - base_difference), "bv_distance": json_value(bv),
    }
    return _finish(pair, j, checks, row)


def _pow(base: int, beta):
    """``base**(beta-1)``, exact for rational beta."""
    if isinstance(beta, float):
        return float(base) ** (beta - 1)
    return power_value(1, base, Fraction(beta) - 1)


def _window_is(window, lo, hi) -> bool:
    return window is not None and window.L == lo and window.R == hi


VERIFIERS = {
    Setting.THM3: verify_thm3,
    Setting.THM4: verify_thm4,
    Setting.THM5: verify_thm5,
    Setting.THM6: verify_thm6,
}


def reproduce_setting(
    setting: Setting,
    beta,
    j_max: int,
    strategy: str = "unimodal",
    mode: ScalarMode = ScalarMode.RATIONAL,
) -> ExperimentReport:
    """
    Build and verify j = 1..j_max, then check the sequence-level behaviour.

    thm3/thm5: the derivative gap stays at 1 - 2^(beta-1).
    thm4/thm6: the centered derivative magnitudes decrease strictly.
    """
    pair = build_sequence(setting, beta, j_max, strategy, mode)
    reports = [VERIFIERS[setting](pair, j) for j in range(1, j_max + 1)]
    rows = [r["row"] for r in reports]
    sequence = _Checks()
    heights = pair.heights
    sequence.add("heights-increasing", all(b > a for a, b in zip(heights, heights[1:])))
    if setting in (Setting.THM4, Setting.THM6):
        sizes = [abs(r["derivative"]) for r in rows]
        sequence.add("derivative-decreasing", all(b < a for a, b in zip(sizes, sizes[1:])))
    else:
        gaps = [r["derivative_gap"] for r in rows]
        sequence.add("gap-persists", all(_close(g, gaps[0], FLOAT_TOL) for g in gaps))
    report = ExperimentReport(
        name=f"reproduce-{setting.value}",
        parameters={"setting": setting.value, "beta": json_value(beta), "j_max": j_max, "strategy": strategy},
        rows=rows,
        verdict="pass" if sequence.passed else "fail",
        decision_rule="every member verified and the sequence-level checks hold",
        summary={"sequence_checks": sequence.items},
        metadata={"lower_bound": pair.lower_bound, "heights": list(heights)},
    )
    if not sequence.passed:
        raise VerificationError(f"{setting.value}: sequence checks failed", report=report.model_dump())
    return report
