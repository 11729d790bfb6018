"""
Structural checks on maximal functions.

Discrete checks run on exact whole-line profiles of the uncentered classical
operator. Continuous checks run on the one-sided operator M_R of a
piecewise-linear function with finite differences.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

from ..errors import DomainError, VerificationError
from ..schemas import CheckReport, function_digest, json_value
from .functions import DiscreteBVFunction, OperatorVariant, PiecewiseLinearFunction, Side
from .maxcont import AbsPiecewiseLinear, one_sided_max, right_radius_candidates
from .profiles import DiscreteMaximalProfile, maximal_function_discrete
from .scalar import compare
from .variation import IntervalZ, var_discrete

logger = logging.getLogger(__name__)

# Finite-difference settings for the continuous checks
FD_STEP = 1e-6
FD_TOL = 1e-4
LOCAL_STEP = 1e-7
LOCAL_TOL = 1e-6
TAIL_SCAN = 50


class StringKind(str, enum.Enum):
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ExtremaString:
    """A maximal plateau that is a strict local max or min; ``None`` ends are infinite."""

    left: Optional[int]
    right: Optional[int]
    level: Any
    kind: StringKind

    def contains(self, n: int) -> bool:
        return (self.left is None or self.left <= n) and (self.right is None or n <= self.right)


def _plateaus(profile: DiscreteMaximalProfile) -> List[List[Any]]:
    runs: List[List[Any]] = []
    for n in profile.explicit_points():
        v = profile.value(n)
        if runs and compare(v, runs[-1][2]) == 0:
            runs[-1][1] = n
        else:
            runs.append([n, n, v])
    return runs


def extrema_strings(profile: DiscreteMaximalProfile) -> List[ExtremaString]:
    """
    Local-extremum plateaus of an exact classical profile, left to right.

    Beyond the explicit window each tail is either constant (the outermost
    plateau extends to infinity) or strictly decreasing away from the core
    (a lower neighbour). A constant profile has no strings.
    """
    if profile.left_form is None or profile.right_form is None:
        raise DomainError("extrema strings need a classical profile")
    if profile.is_constant():
        return []
    runs = _plateaus(profile)
    left_open = profile.left_form.is_constant
    right_open = profile.right_form.is_constant
    strings = []
    for i, (lo, hi, level) in enumerate(runs):
        left_end: Optional[int] = lo
        right_end: Optional[int] = hi
        neighbours = []
        if i > 0:
            neighbours.append(compare(runs[i - 1][2], level))
        elif left_open:
            left_end = None
        else:
            neighbours.append(-1)
        if i < len(runs) - 1:
            neighbours.append(compare(runs[i + 1][2], level))
        elif right_open:
            right_end = None
        else:
            neighbours.append(-1)
        if not neighbours:
            continue
        if all(c < 0 for c in neighbours):
            strings.append(ExtremaString(left_end, right_end, level, StringKind.MAX))
        elif all(c > 0 for c in neighbours):
            strings.append(ExtremaString(left_end, right_end, level, StringKind.MIN))
    return strings


def check_contact(f: DiscreteBVFunction) -> CheckReport:
    """At both finite ends of every max-string the maximal function touches |f|."""
    profile = maximal_function_discrete(f)
    violations = []
    for s in extrema_strings(profile):
        if s.kind is not StringKind.MAX:
            continue
        for end in (s.left, s.right):
            if end is None:
                continue
            if compare(profile.value(end), abs(f.evaluate(end))) != 0:
                violations.append({
                    "n": end,
                    "maximal": json_value(profile.value(end)),
                    "abs_f": json_value(abs(f.evaluate(end))),
                })
    return CheckReport(
        check="contact",
        instance_digest=function_digest(f),
        verdict="fail" if violations else "pass",
        violations=violations,
    )


class Control(str, enum.Enum):
    RIGHT_HALF = "i"
    LEFT_HALF = "ii"
    BOTH = "both"
    NOT_APPLICABLE = "not-applicable"


def _non_decreasing_until(profile: DiscreteMaximalProfile, end: int) -> bool:
    # left tail is non-decreasing towards the core, so the explicit window decides
    stop = min(end, profile.explicit_hi)
    return all(
        compare(profile.value(n), profile.value(n + 1)) <= 0
        for n in range(profile.explicit_lo, stop)
    )


def _non_increasing_from(profile: DiscreteMaximalProfile, start: int) -> bool:
    begin = max(start, profile.explicit_lo)
    return all(
        compare(profile.value(n), profile.value(n + 1)) >= 0
        for n in range(begin, profile.explicit_hi)
    )


def classify_control(profile: DiscreteMaximalProfile, strings: List[ExtremaString], n: int) -> Control:
    """Which half-line variation bound applies at n (if any)."""
    if profile.is_constant():
        return Control.BOTH
    right_half = left_half = False
    for prev, nxt in zip(strings, strings[1:]):
        if prev.kind is StringKind.MIN and nxt.kind is StringKind.MAX:
            if (prev.left is None or prev.left <= n) and (nxt.right is None or n <= nxt.right):
                right_half = True
        if prev.kind is StringKind.MAX and nxt.kind is StringKind.MIN:
            if (prev.left is None or prev.left <= n) and (nxt.right is None or n <= nxt.right):
                left_half = True
    if strings:
        first, last = strings[0], strings[-1]
        if first.kind is StringKind.MAX and (first.right is None or n <= first.right):
            if first.right is None or _non_decreasing_until(profile, first.right):
                right_half = True
        if last.kind is StringKind.MAX and (last.left is None or n >= last.left):
            if last.left is None or _non_increasing_from(profile, last.left):
                left_half = True
    if right_half and left_half:
        return Control.BOTH
    if right_half:
        return Control.RIGHT_HALF
    if left_half:
        return Control.LEFT_HALF
    return Control.NOT_APPLICABLE


def one_sided_control_check(f: DiscreteBVFunction, n: int) -> CheckReport:
    """
    Half-line variation control at n.

    (i) Var over [n, inf) of the maximal function is at most that of f;
    (ii) the same over (-inf, n].
    """
    profile = maximal_function_discrete(f)
    strings = extrema_strings(profile)
    control = classify_control(profile, strings, n)
    violations = []
    details = {"n": n, "classification": control.value}
    halves = []
    if control in (Control.RIGHT_HALF, Control.BOTH):
        halves.append(("i", IntervalZ(n, None)))
    if control in (Control.LEFT_HALF, Control.BOTH):
        halves.append(("ii", IntervalZ(None, n)))
    for name, window in halves:
        lhs = profile.variation(window)
        rhs = var_discrete(f, window)
        details[f"var_maximal_{name}"] = json_value(lhs)
        details[f"var_f_{name}"] = json_value(rhs)
        if compare(lhs, rhs) > 0:
            violations.append({"case": name, "var_maximal": json_value(lhs), "var_f": json_value(rhs)})
    if control is Control.NOT_APPLICABLE:
        verdict = "not-applicable"
    else:
        verdict = "fail" if violations else "pass"
    return CheckReport(
        check="one-sided-control",
        instance_digest=function_digest(f),
        verdict=verdict,
        violations=violations,
        details=details,
    )


class TailLimits(NamedTuple):
    a: Any
    b: Any
    c: Any


def tail_limit_check(f: DiscreteBVFunction) -> CheckReport:
    """The maximal function tends to c = max(|a|, |b|) on both sides and never drops below it."""
    a, b = abs(f.left_tail), abs(f.right_tail)
    c = max(a, b)
    profile = maximal_function_discrete(f)
    violations = []
    for side, limit in zip(("left", "right"), profile.limits):
        if compare(limit, c) != 0:
            violations.append({"side": side, "limit": json_value(limit), "expected": json_value(c)})
    lo = min(f.core_lo - TAIL_SCAN, profile.explicit_lo)
    hi = max(f.core_hi + TAIL_SCAN, profile.explicit_hi)
    for n in range(lo, hi + 1):
        if compare(profile.value(n), c) < 0:
            violations.append({"n": n, "maximal": json_value(profile.value(n)), "c": json_value(c)})
            break
    return CheckReport(
        check="tail-limit",
        instance_digest=function_digest(f),
        verdict="fail" if violations else "pass",
        violations=violations,
        details={"a": json_value(a), "b": json_value(b), "c": json_value(c)},
    )


def tail_limits(f: DiscreteBVFunction) -> TailLimits:
    """(|a|, |b|, c) after checking the profile against c."""
    report = tail_limit_check(f)
    if not report.passed:
        raise VerificationError("maximal function falls below its tail limit", report=report.model_dump())
    a, b = abs(f.left_tail), abs(f.right_tail)
    return TailLimits(a, b, max(a, b))


def good_radii(f: PiecewiseLinearFunction, x) -> List[float]:
    """All radii r >= 0 at which M_R f(x) is attained (0 stands for the shrink limit)."""
    g = AbsPiecewiseLinear(f)
    if g.is_zero:
        raise DomainError("good radii of the zero function are undefined")
    candidates = right_radius_candidates(g, float(x))
    top = max(value for _, value in candidates)
    return sorted({r for r, value in candidates if compare(value, top) == 0})


def _m_right(f: PiecewiseLinearFunction, x: float) -> float:
    return float(one_sided_max(f, x, Side.RIGHT).value)


@dataclass
class DerivativeCheck:
    x: float
    verdict: str
    numeric: Optional[float] = None
    formulas: List[float] = field(default_factory=list)
    radii: List[float] = field(default_factory=list)


def derivative_formula_check(f: PiecewiseLinearFunction, x, h: float = FD_STEP, tol: float = FD_TOL) -> DerivativeCheck:
    """
    Compare a central difference of M_R f at x with the good-radius formula.

    The formula is (|f|(x+r) - |f|(x)) / r for r > 0 and |f|'(x) for r = 0.
    Points where one-sided differences disagree, or where |f| has a kink and
    r = 0 is good, are reported as not applicable.
    """
    x = float(x)
    m0 = _m_right(f, x)
    forward = (_m_right(f, x + h) - m0) / h
    backward = (m0 - _m_right(f, x - h)) / h
    if abs(forward - backward) > tol:
        return DerivativeCheck(x, "not-applicable")
    numeric = (_m_right(f, x + h) - _m_right(f, x - h)) / (2 * h)
    g = AbsPiecewiseLinear(f)
    radii = good_radii(f, x)
    formulas = []
    for r in radii:
        if r > 0:
            formulas.append((float(g.value(x + r)) - float(g.value(x))) / r)
        else:
            slope = g.slope(x)
            if slope is None:
                return DerivativeCheck(x, "not-applicable", numeric, radii=radii)
            formulas.append(float(slope))
    verdict = "pass" if all(abs(numeric - v) <= tol for v in formulas) else "fail"
    return DerivativeCheck(x, verdict, numeric, formulas, radii)


@dataclass
class DisconnectingSet:
    """Grid-resolved components of D = {M_R f > |f|} and of its complement C."""

    detached: List[Tuple[float, float]]
    contact: List[Tuple[float, float]]
    report: CheckReport


def _components(points: Sequence[float], mask: Sequence[bool]) -> List[Tuple[float, float]]:
    out, start = [], None
    for i, inside in enumerate(mask):
        if inside and start is None:
            start = i
        if not inside and start is not None:
            out.append((points[start], points[i - 1]))
            start = None
    if start is not None:
        out.append((points[start], points[-1]))
    return out


def disconnecting_set(f: PiecewiseLinearFunction, grid: Sequence, tol: float = LOCAL_TOL) -> DisconnectingSet:
    """
    Split a grid into D = {M_R f > |f|} and C, and check the sign of (M_R f)'.

    On the interior of D the maximal function must be non-decreasing; on the
    interior of C it coincides with |f|, which must be non-increasing there.
    """
    points = [float(x) for x in grid]
    if any(b <= a for a, b in zip(points, points[1:])):
        raise DomainError("grid must be strictly increasing")
    g = AbsPiecewiseLinear(f)

    def detached_at(x: float) -> bool:
        return compare(_m_right(f, x), float(g.value(x))) > 0

    mask = [detached_at(x) for x in points]
    violations = []
    for i in range(1, len(points) - 1):
        x = points[i]
        if mask[i - 1] and mask[i] and mask[i + 1]:
            lo, hi = x - LOCAL_STEP, x + LOCAL_STEP
            if not (detached_at(lo) and detached_at(hi)):
                continue
            slope = (_m_right(f, hi) - _m_right(f, lo)) / (2 * LOCAL_STEP)
            if slope < -tol:
                violations.append({"x": x, "set": "D", "slope": slope})
        elif not (mask[i - 1] or mask[i] or mask[i + 1]):
            lo, hi = x - LOCAL_STEP, x + LOCAL_STEP
            if detached_at(lo) or detached_at(hi):
                continue
            slope = (float(g.value(hi)) - float(g.value(lo))) / (2 * LOCAL_STEP)
            if slope > tol:
                violations.append({"x": x, "set": "C", "slope": slope})
    report = CheckReport(
        check="disconnecting-set",
        instance_digest=function_digest(f),
        verdict="fail" if violations else "pass",
        violations=violations,
        details={"grid_points": len(points)},
    )
    return DisconnectingSet(
        detached=_components(points, mask),
        contact=_components(points, [not m for m in mask]),
        report=report,
    )
