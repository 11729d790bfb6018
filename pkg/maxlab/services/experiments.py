"""
Convergence demonstrations, inequality fuzzing and open-question probes.

Every experiment returns an ExperimentReport whose verdict follows from its
rows by a fixed rule (``decide_verdict``), so a report can be re-checked
without rerunning anything. Rows are produced in j (or trial) order no matter
how the work was scheduled.
"""

import logging
from dataclasses import asdict, replace
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .. import config
from ..errors import DomainError, UnsupportedVariantError
from ..schemas import ExperimentReport, function_digest, json_value
from .check_registry import check_registry
from .counterexamples import Setting, build_sequence
from .functions import (
    DiscreteBVFunction,
    OperatorVariant,
    PiecewiseLinearFunction,
    Side,
    StepFunction,
    delta_at_origin,
)
from .generators import RandomBVSpec, random_bv, random_pwl, random_step, shrink_candidates
from .maxcont import float_grid, one_sided_max, one_sided_profile, profile_continuous
from .parallel import parallel_map
from .profiles import maximal_function_discrete
from .scalar import ScalarMode, coerce, compare
from .structure import good_radii
from .variation import bvnorm_continuous, bvnorm_discrete, var_continuous, var_profile

logger = logging.getLogger(__name__)

THM2_THRESHOLD = 1e-3
THM1_THRESHOLD = 1e-2
THRESHOLD_NOTE = "threshold is a reporting convention, not a known modulus of continuity"
RADIUS_TOL = 1e-2
PROBE_GRID_STEP = 0.05

DECISION_RULE = (
    "converges iff the second half of the distances is non-increasing and the last one is "
    "below the threshold; diverges iff the second half never drops below half of the "
    "first-half maximum and the last one is at least the threshold; otherwise inconclusive"
)

Perturbation = Callable[[int], Any]
ViolationCallback = Callable[[str, Any, Dict[str, Any]], None]


def _non_increasing(values: Sequence[float]) -> bool:
    eps = config.CMP_EPS
    return all(b <= a + eps * max(1.0, abs(a), abs(b)) for a, b in zip(values, values[1:]))


def decide_verdict(distances: Iterable, threshold: float) -> str:
    """Apply DECISION_RULE to a distance sequence d_1..d_J."""
    d = [float(x) for x in distances]
    if not d:
        raise DomainError("no rows to decide on")
    half = len(d) // 2
    head, tail = d[:half] or d[:1], d[half:]
    last = d[-1]
    if _non_increasing(tail) and last < threshold:
        return "converges"
    if last >= threshold and max(head) > 0 and min(tail) >= max(head) / 2:
        return "diverges"
    return "inconclusive"


# === Perturbation families ===

DISCRETE_FAMILIES = ("bump", "dip", "tail", "zero", "thm5", "thm6")
PWL_FAMILIES = ("tent-scale", "shift", "zero")


def discrete_perturbations(name: str, j_max: int, mode: ScalarMode = ScalarMode.RATIONAL,
                           beta=Fraction(1, 2)) -> Perturbation:
    """
    j -> g_j with ||g_j||_BV = 1/j.

    bump: (1/(2j)) chi_[0,4]; dip: -(1/(2j)) chi_{0}; tail: (1/j) chi_[3,inf);
    thm5/thm6: the counterexample bumps (1/(2j)) chi_[0,h_j] at ``beta``; zero: g_j = 0.
    """
    one = coerce(1, mode)
    if name == "bump":
        return lambda j: DiscreteBVFunction.indicator(0, 4, one / (2 * j), mode)
    if name == "dip":
        return lambda j: DiscreteBVFunction.indicator(0, 0, -one / (2 * j), mode)
    if name == "tail":
        return lambda j: DiscreteBVFunction.from_runs(3, [(one / j, 1)], 0 * one, one / j, mode)
    if name == "zero":
        return lambda j: DiscreteBVFunction.constant(0 * one, mode)
    if name in ("thm5", "thm6"):
        heights = build_sequence(Setting(name), beta, j_max).heights
        return lambda j: DiscreteBVFunction.indicator(0, heights[j - 1], one / (2 * j), mode)
    raise DomainError(f"unknown discrete family {name!r}", known=list(DISCRETE_FAMILIES))


def pwl_perturbations(name: str, f: PiecewiseLinearFunction) -> Perturbation:
    """
    j -> g_j for a piecewise-linear base.

    tent-scale: (1/(2j)) f; shift: f(. - 1/j) - f; zero: g_j = 0.
    """
    one = coerce(1, f.mode)
    if name == "tent-scale":
        return lambda j: f.scale(one / (2 * j))
    if name == "shift":
        return lambda j: f.shift(one / j) - f
    if name == "zero":
        return lambda j: f.scale(0)
    raise DomainError(f"unknown piecewise-linear family {name!r}", known=list(PWL_FAMILIES))


def _check_norm(norm, j: int) -> None:
    if compare(norm, 0) == 0:
        return
    expected = Fraction(1, j) if not isinstance(norm, float) else 1.0 / j
    if compare(norm, expected) != 0:
        raise DomainError(f"perturbation norm mismatch at j={j}: {json_value(norm)} != 1/{j}")


# === Discrete convergence (exact) ===

def _discrete_convergence(
    name: str,
    f: DiscreteBVFunction,
    perturb: Perturbation,
    j_max: int,
    threshold: float,
    variant: OperatorVariant,
    family: Optional[str],
) -> ExperimentReport:
    if j_max < 1:
        raise DomainError(f"j_max must be at least 1, got {j_max}")
    base = maximal_function_discrete(f, variant)
    base_var = base.variation()

    def row(j: int) -> Dict[str, Any]:
        g = perturb(j)
        norm = bvnorm_discrete(g)
        _check_norm(norm, j)
        member = maximal_function_discrete(f + g, variant)
        metrics = member.difference(base)
        member_var = member.variation()
        # sum |P_j'| - |(P_j - P)'| telescopes to Var(P_j) - Var(P_j - P)
        brezis_lieb = member_var - metrics.variation
        return {
            "j": j,
            "bv_norm": float(norm),
            "var_distance": float(metrics.variation),
            "var_distance_exact": json_value(metrics.variation),
            "var_gap": abs(float(member_var) - float(base_var)),
            "sup_distance": float(metrics.sup),
            "sup_bound_ok": compare(metrics.sup, norm) <= 0,
            "brezis_lieb": float(brezis_lieb),
            "brezis_lieb_error": abs(float(brezis_lieb) - float(base_var)),
        }

    rows = parallel_map(row, range(1, j_max + 1))
    verdict = decide_verdict([r["var_distance"] for r in rows], threshold)
    logger.info("%s (%s): verdict %s after j=%d", name, family, verdict, j_max)
    return ExperimentReport(
        name=name,
        parameters={
            "function": function_digest(f),
            "family": family,
            "j_max": j_max,
            "threshold": threshold,
            "variant": variant.describe(),
        },
        rows=rows,
        verdict=verdict,
        decision_rule=DECISION_RULE,
        summary={
            "base_variation": json_value(base_var),
            "final_distance": rows[-1]["var_distance"],
            "final_var_gap": rows[-1]["var_gap"],
            "final_brezis_lieb_error": rows[-1]["brezis_lieb_error"],
            "sup_bound_ok": all(r["sup_bound_ok"] for r in rows),
        },
        metadata={"threshold_note": THRESHOLD_NOTE},
    )


def converge_thm2(
    f: DiscreteBVFunction,
    perturbations: Union[str, Perturbation],
    j_max: int,
    threshold: float = THM2_THRESHOLD,
) -> ExperimentReport:
    """
    Exact Var(M f_j - M f) for f_j = f + g_j, ||g_j||_BV = 1/j, uncentered classical operator.

    Rows also carry |Var(M f_j) - Var(M f)|, the sup distance with the check
    sup|M f_j - M f| <= ||g_j||_BV, and the Brezis-Lieb sum with its distance to Var(M f).
    """
    family = perturbations if isinstance(perturbations, str) else None
    if family is not None:
        perturbations = discrete_perturbations(family, j_max, f.mode)
    return _discrete_convergence("converge-thm2", f, perturbations, j_max, threshold, OperatorVariant(), family)


# === Continuous convergence on a grid ===

def _pwl_profile(f: PiecewiseLinearFunction, grid: np.ndarray, side: Side) -> np.ndarray:
    if side is Side.TWO_SIDED:
        return np.maximum(one_sided_profile(f, grid, Side.RIGHT), one_sided_profile(f, grid, Side.LEFT))
    return one_sided_profile(f, grid, side)


def _hull(functions: Sequence[PiecewiseLinearFunction]):
    xs = [float(x) for g in functions for x in g.xs]
    return min(xs), max(xs)


def _radius_gaps(f: PiecewiseLinearFunction, member: PiecewiseLinearFunction) -> List[float]:
    """Distance from the witness radius of ``member`` to the nearest good radius of f, at sample points."""
    if len(f.nodes) < 2:
        return []
    lo, hi = float(f.xs[0]), float(f.xs[-1])
    gaps = []
    for x in np.linspace(lo, hi, 7)[1:-1]:
        radii = good_radii(f, x)
        window = one_sided_max(member, x, Side.RIGHT).window
        r = float(window.R) - float(window.L)
        gaps.append(min(abs(r - g) for g in radii))
    return gaps


def converge_thm1(
    f: PiecewiseLinearFunction,
    perturbations: Union[str, Perturbation],
    grid_step: float = 1e-3,
    j_max: int = 30,
    threshold: float = THM1_THRESHOLD,
    side: Side = Side.TWO_SIDED,
    margin: float = 1.0,
) -> ExperimentReport:
    """
    Grid L^1 distance of derivatives, sum |Delta(M f_j) - Delta(M f)|, for f_j = f + g_j.

    ``tail_bound`` bounds the part of the distance outside the grid: there each
    maximal function is monotone and vanishes at infinity. At j_max the witness
    radii of f_j are compared with the good radii of f.
    """
    if not f.has_zero_tails:
        raise DomainError("converge_thm1 needs zero tails")
    if j_max < 1:
        raise DomainError(f"j_max must be at least 1, got {j_max}")
    family = perturbations if isinstance(perturbations, str) else None
    if family is not None:
        perturbations = pwl_perturbations(family, f)
    gs = [perturbations(j) for j in range(1, j_max + 1)]
    members = [f + g for g in gs]
    if any(not m.has_zero_tails for m in members):
        raise DomainError("perturbed members must have zero tails")
    lo, hi = _hull([f, *members])
    grid = np.asarray(float_grid(lo - margin, hi + margin, grid_step))
    base = _pwl_profile(f, grid, side)
    base_steps = np.diff(base)

    def row(j: int) -> Dict[str, Any]:
        values = _pwl_profile(members[j - 1], grid, side)
        return {
            "j": j,
            "derivative_distance": float(np.abs(np.diff(values) - base_steps).sum()),
            "tail_bound": float(values[0] + base[0] + values[-1] + base[-1]),
            "f_derivative_distance": float(var_continuous(gs[j - 1])),
            "sup_distance": float(np.abs(values - base).max()),
        }

    rows = parallel_map(row, range(1, j_max + 1))
    verdict = decide_verdict([r["derivative_distance"] for r in rows], threshold)
    gaps = _radius_gaps(f, members[-1])
    return ExperimentReport(
        name="converge-thm1",
        parameters={
            "function": function_digest(f),
            "family": family,
            "j_max": j_max,
            "grid_step": grid_step,
            "threshold": threshold,
            "side": side.value,
        },
        rows=rows,
        verdict=verdict,
        decision_rule=DECISION_RULE,
        summary={
            "final_distance": rows[-1]["derivative_distance"],
            "grid_points": len(grid),
            "good_radii_gaps": gaps,
            "good_radii_ok": all(g <= RADIUS_TOL for g in gaps),
        },
        metadata={"threshold_note": THRESHOLD_NOTE},
    )


# === Fuzzing ===

def _spec_parameters(spec: RandomBVSpec) -> Dict[str, Any]:
    return {k: json_value(v) if not isinstance(v, tuple) else [json_value(x) for x in v]
            for k, v in asdict(spec).items()}


def shrink(f: DiscreteBVFunction, still_fails: Callable[[DiscreteBVFunction], bool]) -> DiscreteBVFunction:
    """Greedy shrinking: take the first smaller relative that still fails, until none does."""
    current = f
    while True:
        for candidate in shrink_candidates(current):
            if still_fails(candidate):
                current = candidate
                break
        else:
            return current


def _fuzz_instance(check, spec: RandomBVSpec, trial: int):
    if check.fractional:
        spec = replace(spec, left_tail=Fraction(0), right_tail=Fraction(0))
    return random_step(spec, trial) if check.instance == "step" else random_bv(spec, trial)


def _extremal_instance(check, mode: ScalarMode):
    if check.id == "var-bound":
        return delta_at_origin(mode)
    if check.id == "continuous-var-bound":
        one = coerce(1, mode)
        return StepFunction.indicator(0 * one, one, one, mode)
    return None


def fuzz_inequalities(
    spec: RandomBVSpec,
    trials: int,
    which: Iterable[str],
    beta=Fraction(1, 2),
    on_violation: Optional[ViolationCallback] = None,
) -> ExperimentReport:
    """
    Run the registered checks on ``trials`` seeded instances each.

    Discrete violations are shrunk before ``on_violation(check_id, instance, report)``
    is called. The summary records the largest observed ratio per inequality and
    where it was attained, plus the ratio of the known extremal instance.
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    checks = [check_registry.get(c) for c in which]
    if not checks:
        raise DomainError("no checks selected")

    def run_trial(trial: int) -> List[Dict[str, Any]]:
        out = []
        for check in checks:
            f = _fuzz_instance(check, spec, trial)
            report = check.handler(f, beta if check.fractional else 0)
            out.append({
                "trial": trial,
                "check": check.id,
                "verdict": report.verdict,
                "ratio": report.details.get("ratio"),
                "digest": report.instance_digest,
            })
        return out

    rows = [row for batch in parallel_map(run_trial, range(trials)) for row in batch]

    summary: Dict[str, Any] = {}
    total_violations = 0
    for check in checks:
        mine = [r for r in rows if r["check"] == check.id]
        failed = [r for r in mine if r["verdict"] == "fail"]
        total_violations += len(failed)
        entry: Dict[str, Any] = {
            "trials": len(mine),
            "violations": len(failed),
            "not_applicable": sum(r["verdict"] == "not-applicable" for r in mine),
        }
        rated = [r for r in mine if r["ratio"] is not None]
        if rated:
            ratios = [r["ratio"] for r in rated]
            best = int(np.argmax(ratios))
            entry["max_ratio"] = ratios[best]
            entry["max_ratio_trial"] = rated[best]["trial"]
            entry["ratio_quantiles"] = {
                f"q{p}": float(np.percentile(ratios, p)) for p in (50, 90, 99)
            }
        extremal = _extremal_instance(check, spec.mode)
        if extremal is not None:
            entry["extremal_ratio"] = check.handler(extremal, 0).details["ratio"]
        summary[check.id] = entry

        for r in failed:
            f = _fuzz_instance(check, spec, r["trial"])
            b = beta if check.fractional else 0
            if isinstance(f, DiscreteBVFunction):
                f = shrink(f, lambda g: check.handler(g, b).verdict == "fail")
            report = check.handler(f, b)
            logger.warning("%s violated at trial %d (shrunk digest %s)", check.id, r["trial"], report.instance_digest)
            if on_violation is not None:
                on_violation(check.id, f, {"trial": r["trial"], **report.model_dump()})

    return ExperimentReport(
        name="fuzz",
        parameters={
            "checks": [c.id for c in checks],
            "trials": trials,
            "beta": json_value(beta),
            "spec": _spec_parameters(spec),
        },
        rows=rows,
        verdict="fail" if total_violations else "pass",
        decision_rule="pass iff no trial violates a selected check",
        summary={"violations": total_violations, "checks": summary},
    )


# === Open-question probes ===

PROBE_SETTINGS = ("A", "B", "C", "D")


def _direction_spec(spec: RandomBVSpec) -> RandomBVSpec:
    return replace(spec, seed=spec.seed + 1, left_tail=Fraction(0), right_tail=Fraction(0))


def _scaled(direction, norm, mode: ScalarMode) -> Perturbation:
    if compare(norm, 0) == 0:
        return lambda j: direction
    one = coerce(1, mode)
    return lambda j: direction.scale(one / (j * norm))


def _rational_grid(lo, hi, step: float, mode: ScalarMode) -> List:
    den = max(1, round(1 / step))
    start, stop = int(np.floor(float(lo) * den)), int(np.ceil(float(hi) * den))
    points = [Fraction(k, den) for k in range(start, stop + 1)]
    return [float(p) for p in points] if mode is ScalarMode.F64 else points


def _sampled_distances(f, members, variant: OperatorVariant, points, derivative: bool) -> List[float]:
    base = profile_continuous(f, points, variant)
    out = []
    for g in members:
        diff = profile_continuous(g, points, variant) - base
        if derivative:
            values = np.asarray([float(v) for v in diff.values])
            out.append(float(np.abs(np.diff(values)).sum()))
        else:
            out.append(float(var_profile(diff)))
    return out


def _probe_trial(setting: str, spec: RandomBVSpec, trial: int, j_max: int, threshold: float,
                 family: str, grid_step: float):
    """(instance, distances, verdict) of one probe trial."""
    direction_spec = _direction_spec(spec)
    mode = spec.mode
    if setting == "D":
        variant = OperatorVariant(centered=True)
        if family in ("zero", "thm5", "thm6"):
            f = delta_at_origin(mode) if family != "zero" else random_bv(spec, trial)
            perturb = discrete_perturbations(family, j_max, mode)
        else:
            f = random_bv(spec, trial)
            direction = random_bv(direction_spec, trial)
            perturb = _scaled(direction, bvnorm_discrete(direction), mode)
        report = _discrete_convergence("probe-D", f, perturb, j_max, threshold, variant, family)
        return f, [r["var_distance"] for r in report.rows]

    if setting == "A":
        variant = OperatorVariant(centered=True)
        f = random_pwl(spec, trial)
        direction = random_pwl(direction_spec, trial)
        if family == "zero":
            members = [f for _ in range(j_max)]
        else:
            perturb = _scaled(direction, var_continuous(direction), mode)
            members = [f + perturb(j) for j in range(1, j_max + 1)]
        lo, hi = _hull([f, *members])
        grid = float_grid(lo - 1, hi + 1, grid_step)
        return f, _sampled_distances(f, members, variant, grid, derivative=True)

    variant = OperatorVariant(centered=setting == "C")
    f = random_step(spec, trial)
    direction = random_step(direction_spec, trial)
    if family == "zero":
        members = [f for _ in range(j_max)]
    else:
        perturb = _scaled(direction, bvnorm_continuous(direction), mode)
        members = [f + perturb(j) for j in range(1, j_max + 1)]
    bps = [t for g in (f, *members) for t in g.breakpoints] or [0]
    points = _rational_grid(min(bps) - 1, max(bps) + 1, grid_step, mode)
    return f, _sampled_distances(f, members, variant, points, derivative=False)


def _supporting(distances: List[float], threshold: float) -> bool:
    verdict = decide_verdict(distances, threshold)
    half = len(distances) // 2
    return verdict == "converges" or (verdict == "inconclusive" and _non_increasing(distances[half:]))


def probe_open_questions(
    setting: str,
    spec: RandomBVSpec,
    trials: int,
    j_max: int = 10,
    threshold: float = THM2_THRESHOLD,
    family: str = "random",
    grid_step: float = PROBE_GRID_STEP,
    on_violation: Optional[ViolationCallback] = None,
) -> ExperimentReport:
    """
    Distance sequences for the centered / BV(R) analogues of the continuity results.

    A: centered operator on W^{1,1} (piecewise-linear, grid derivative distance).
    B: uncentered operator on BV(R) (step functions, sampled variation distance).
    C: centered operator on BV(R) (step functions).
    D: centered operator on BV(Z) (exact profiles).

    A trial supports continuity when its verdict is "converges", or "inconclusive"
    with a non-increasing second half; anything else is a candidate violation, shrunk
    (setting D) and handed to ``on_violation``. The run verdict is never stronger than
    "inconclusive-supporting".
    """
    if setting not in PROBE_SETTINGS:
        raise DomainError(f"unknown probe setting {setting!r}", known=list(PROBE_SETTINGS))
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if family in ("thm5", "thm6") and setting != "D":
        raise UnsupportedVariantError(f"family {family} is discrete; use setting D")

    def run(trial: int) -> Dict[str, Any]:
        f, distances = _probe_trial(setting, spec, trial, j_max, threshold, family, grid_step)
        return {
            "trial": trial,
            "digest": function_digest(f),
            "first_distance": distances[0],
            "final_distance": distances[-1],
            "verdict": decide_verdict(distances, threshold),
            "classification": "supporting" if _supporting(distances, threshold) else "candidate",
            "distances": distances,
        }

    rows = parallel_map(run, range(trials))
    candidates = [r for r in rows if r["classification"] == "candidate"]
    for r in candidates:
        f, _ = _probe_trial(setting, spec, r["trial"], j_max, threshold, family, grid_step)
        if setting == "D" and family == "random":
            direction = random_bv(_direction_spec(spec), r["trial"])
            perturb = _scaled(direction, bvnorm_discrete(direction), spec.mode)

            def still_candidate(g: DiscreteBVFunction) -> bool:
                report = _discrete_convergence(
                    "probe-D", g, perturb, j_max, threshold, OperatorVariant(centered=True), family
                )
                return not _supporting([row["var_distance"] for row in report.rows], threshold)

            f = shrink(f, still_candidate)
        logger.warning("question %s: candidate violation at trial %d", setting, r["trial"])
        if on_violation is not None:
            on_violation(f"question-{setting}", f, {"trial": r["trial"], "distances": r["distances"]})

    return ExperimentReport(
        name=f"probe-{setting}",
        parameters={
            "setting": setting,
            "trials": trials,
            "j_max": j_max,
            "threshold": threshold,
            "family": family,
            "grid_step": grid_step,
            "spec": _spec_parameters(spec),
        },
        rows=rows,
        verdict="candidate-violation" if candidates else "inconclusive-supporting",
        decision_rule=(
            "per trial: supporting iff converges, or inconclusive with a non-increasing second "
            "half; the run is inconclusive-supporting iff every trial is supporting"
        ),
        summary={"candidates": len(candidates), "supporting": len(rows) - len(candidates)},
        metadata={"threshold_note": THRESHOLD_NOTE},
    )
