"""
Check Registry - the inequality and structural checks the fuzzer can run.

Each check has:
- id: Unique identifier (e.g., "var-bound")
- name: Human-readable name
- category: inequality or structure
- description: What is measured
- statement: The inequality or property being checked
- instance: Which random instances it takes (discrete or step)
- handler: ``handler(f, beta) -> CheckReport``
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List

from ..errors import DomainError
from ..schemas import CheckReport, function_digest, json_value
from .functions import DiscreteBVFunction, OperatorVariant, StepFunction
from .maxcont import step_max_continuous
from .profiles import maximal_function_discrete
from .scalar import compare
from .structure import check_contact, one_sided_control_check, tail_limit_check
from .variation import SampledProfile, var_continuous, var_discrete, var_profile, varq_riesz

# Relative slack for the float-valued fractional bounds
FRACTIONAL_TOL = 1e-9


@dataclass
class CheckDefinition:
    id: str
    name: str
    category: str
    description: str
    statement: str
    instance: str = "discrete"  # discrete, step
    fractional: bool = False
    handler: Callable[[Any, Any], CheckReport] = None


def _ratio(lhs, rhs) -> float:
    return float(lhs) / float(rhs) if float(rhs) > 0 else 0.0


def _report(check: str, f, ok: bool, lhs, rhs, **details) -> CheckReport:
    violations = [] if ok else [{"lhs": json_value(lhs), "rhs": json_value(rhs)}]
    return CheckReport(
        check=check,
        instance_digest=function_digest(f),
        verdict="pass" if ok else "fail",
        violations=violations,
        details={"lhs": json_value(lhs), "rhs": json_value(rhs), "ratio": _ratio(lhs, rhs), **details},
    )


def step_samples(f: StepFunction) -> List:
    """Breakpoints, cell midpoints and points well outside the jumps, increasing."""
    bps = list(f.breakpoints)
    if not bps:
        return [0 * f.left_tail, 1 + 0 * f.left_tail]
    span = max(bps[-1] - bps[0], 1)
    points = set(bps)
    points.update((a + b) / 2 for a, b in zip(bps, bps[1:]))
    for k in (1, 4, 16):
        points.add(bps[0] - k * span)
        points.add(bps[-1] + k * span)
    return sorted(points)


class CheckRegistry:
    """
    Central registry for fuzzable checks.
    """

    def __init__(self):
        self._checks: Dict[str, CheckDefinition] = {}
        self._register_builtin_checks()

    def register(self, check: CheckDefinition):
        """Register a new check."""
        self._checks[check.id] = check

    def get(self, check_id: str) -> CheckDefinition:
        """Get a check by ID."""
        check = self._checks.get(check_id)
        if check is None:
            raise DomainError(f"unknown check {check_id!r}", known=sorted(self._checks))
        return check

    def ids(self) -> List[str]:
        return list(self._checks)

    def list_all(self) -> List[Dict]:
        """Every registered check as a JSON-ready dict (`maxlab check --list`)."""
        return [
            {
                "id": c.id,
                "name": c.name,
                "category": c.category,
                "description": c.description,
                "statement": c.statement,
                "instance": c.instance,
                "fractional": c.fractional,
            }
            for c in self._checks.values()
        ]

    def list_by_category(self) -> Dict[str, List[str]]:
        """List check ids grouped by category."""
        result: Dict[str, List[str]] = {}
        for check in self._checks.values():
            result.setdefault(check.category, []).append(check.id)
        return result

    def _register_builtin_checks(self):
        """Register all built-in checks."""

        self.register(CheckDefinition(
            id="var-bound",
            name="Discrete variation bound",
            category="inequality",
            description="Exact Var of the uncentered maximal function over Z against Var(f)",
            statement="Var(Mf) <= Var(f)",
            handler=self._check_var_bound,
        ))
        self.register(CheckDefinition(
            id="varq-bound",
            name="Discrete fractional q-variation bound",
            category="inequality",
            description="Certified lower bound of Var_q(M_beta f), q = 1/(1-beta), against 4^(1/q) Var(f)",
            statement="Var_q(M_beta f) <= 4^(1/q) Var(f)",
            fractional=True,
            handler=self._check_varq_bound,
        ))
        self.register(CheckDefinition(
            id="continuous-var-bound",
            name="Continuous variation bound",
            category="inequality",
            description="Sampled (lower-bound) variation of the uncentered maximal function of a step function",
            statement="Var(Mf) <= Var(f)",
            instance="step",
            handler=self._check_continuous_var_bound,
        ))
        self.register(CheckDefinition(
            id="continuous-varq-bound",
            name="Continuous fractional q-variation bound",
            category="inequality",
            description="Riesz partition sum of M_beta f on step-function samples against 8^(1/q) Var(f)",
            statement="Var_q(M_beta f) <= 8^(1/q) Var(f)",
            instance="step",
            fractional=True,
            handler=self._check_continuous_varq_bound,
        ))
        self.register(CheckDefinition(
            id="contact",
            name="Point of contact",
            category="structure",
            description="Both finite ends of every string of local maxima touch |f|",
            statement="Mf(n) = |f(n)| at the ends of max-strings",
            handler=lambda f, beta: check_contact(f),
        ))
        self.register(CheckDefinition(
            id="one-sided-control",
            name="One-sided variation control",
            category="structure",
            description="Half-line variation bounds at every point of the core",
            statement="Var_[n,inf)(Mf) <= Var_[n,inf)(f) or Var_(-inf,n](Mf) <= Var_(-inf,n](f)",
            handler=self._check_one_sided_control,
        ))
        self.register(CheckDefinition(
            id="tail-limit",
            name="Tail limits",
            category="structure",
            description="The maximal function tends to max(|a|, |b|) and never drops below it",
            statement="Mf(n) -> c and Mf >= c",
            handler=lambda f, beta: tail_limit_check(f),
        ))

    # === Handlers ===

    @staticmethod
    def _check_var_bound(f: DiscreteBVFunction, beta=0) -> CheckReport:
        lhs = maximal_function_discrete(f).variation()
        rhs = var_discrete(f)
        return _report("var-bound", f, compare(lhs, rhs) <= 0, lhs, rhs)

    @staticmethod
    def _check_varq_bound(f: DiscreteBVFunction, beta) -> CheckReport:
        if not f.has_zero_tails:
            return CheckReport(check="varq-bound", instance_digest=function_digest(f), verdict="not-applicable")
        variant = OperatorVariant(beta=beta)
        q = float(variant.q)
        lower, upper = maximal_function_discrete(f, variant).varq_bounds(q)
        rhs = 4 ** (1 / q) * float(var_discrete(f))
        ok = lower <= rhs * (1 + FRACTIONAL_TOL)
        return _report("varq-bound", f, ok, lower, rhs, q=q, upper=upper)

    @staticmethod
    def _check_continuous_var_bound(f: StepFunction, beta=0) -> CheckReport:
        samples = SampledProfile.of(lambda x: step_max_continuous(f, x).value, step_samples(f))
        lhs = var_profile(samples)
        rhs = var_continuous(f)
        return _report("continuous-var-bound", f, compare(lhs, rhs) <= 0, lhs, rhs, samples=len(samples))

    @staticmethod
    def _check_continuous_varq_bound(f: StepFunction, beta) -> CheckReport:
        if not f.has_zero_tails:
            return CheckReport(check="continuous-varq-bound", instance_digest=function_digest(f), verdict="not-applicable")
        variant = OperatorVariant(beta=beta)
        q = float(variant.q)
        samples = SampledProfile.of(lambda x: step_max_continuous(f, x, variant).value, step_samples(f))
        lhs = varq_riesz(samples, q)
        rhs = 8 ** (1 / q) * float(var_continuous(f))
        ok = lhs <= rhs * (1 + FRACTIONAL_TOL)
        return _report("continuous-varq-bound", f, ok, lhs, rhs, q=q)

    @staticmethod
    def _check_one_sided_control(f: DiscreteBVFunction, beta=0) -> CheckReport:
        violations, applicable = [], 0
        for n in range(f.core_lo - 1, f.core_hi + 2):
            report = one_sided_control_check(f, n)
            if report.verdict != "not-applicable":
                applicable += 1
            violations.extend({"n": n, **v} for v in report.violations)
        if violations:
            verdict = "fail"
        else:
            verdict = "pass" if applicable else "not-applicable"
        return CheckReport(
            check="one-sided-control",
            instance_digest=function_digest(f),
            verdict=verdict,
            violations=violations,
            details={"applicable_points": applicable},
        )


# Global instance
check_registry = CheckRegistry()
