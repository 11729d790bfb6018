from fractions import Fraction

import pytest

from maxlab.errors import DomainError, UnsupportedVariantError
from maxlab.schemas import CheckReport, function_digest
from maxlab.services.check_registry import CheckDefinition, check_registry
from maxlab.services.experiments import (
    converge_thm1,
    converge_thm2,
    decide_verdict,
    discrete_perturbations,
    fuzz_inequalities,
    probe_open_questions,
    shrink,
)
from maxlab.services.functions import DiscreteBVFunction, PiecewiseLinearFunction
from maxlab.services.generators import RandomBVSpec
from maxlab.services.variation import bvnorm_discrete


@pytest.mark.parametrize("distances, threshold, verdict", [
    ([1, 0.5, 0.25, 0.125], 0.2, "converges"),
    ([1, 1, 1, 1], 0.1, "diverges"),
    ([1, 0.5, 0.4, 0.3], 0.1, "inconclusive"),
    ([0.0], 1e-3, "converges"),
    ([0.1, 0.2, 0.3, 0.4], 1.0, "inconclusive"),
])
def test_decide_verdict(distances, threshold, verdict):
    assert decide_verdict(distances, threshold) == verdict


def test_decide_verdict_needs_rows():
    with pytest.raises(DomainError):
        decide_verdict([], 1.0)


@pytest.mark.parametrize("family", ["bump", "dip", "tail"])
def test_perturbation_norms(family):
    perturb = discrete_perturbations(family, 5)
    for j in range(1, 6):
        assert bvnorm_discrete(perturb(j)) == Fraction(1, j)


def test_converge_thm2_bump(delta):
    report = converge_thm2(delta, "bump", 6)
    rows = report.rows
    assert [r["j"] for r in rows] == list(range(1, 7))
    distances = [r["var_distance"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(distances, distances[1:]))
    assert distances[-1] < distances[0]
    for r in rows:
        assert r["bv_norm"] == pytest.approx(1 / r["j"])
        assert r["sup_bound_ok"]
        assert r["brezis_lieb_error"] <= 2 * r["var_distance"] + 1e-12
    assert report.summary["base_variation"] == "2/1"
    assert report.verdict == "inconclusive"
    assert "reporting convention" in report.metadata["threshold_note"]


def test_converge_thm2_with_loose_threshold(delta):
    assert converge_thm2(delta, "bump", 4, threshold=10.0).verdict == "converges"
    zero = converge_thm2(delta, "zero", 3)
    assert all(r["var_distance"] == 0 for r in zero.rows)
    assert zero.verdict == "converges"


def test_converge_thm2_rejects_wrong_norms(delta):
    with pytest.raises(DomainError):
        converge_thm2(delta, lambda j: DiscreteBVFunction.indicator(0, 0, 1), 2)
    with pytest.raises(DomainError):
        converge_thm2(delta, "wiggle", 2)


def test_converge_thm1_tent_scale(tent):
    report = converge_thm1(tent, "tent-scale", grid_step=0.01, j_max=4)
    rows = report.rows
    first = rows[0]["derivative_distance"]
    for r in rows:
        assert r["derivative_distance"] * r["j"] == pytest.approx(first, rel=1e-9)
        assert r["f_derivative_distance"] == pytest.approx(1 / r["j"])
    assert report.summary["good_radii_ok"]
    assert report.verdict in ("converges", "inconclusive")


def test_converge_thm1_needs_zero_tails():
    ramp = PiecewiseLinearFunction.create([(0, 0), (1, 1)])
    with pytest.raises(DomainError):
        converge_thm1(ramp, "zero", j_max=2)


def test_fuzz_inequalities_passes_known_bounds():
    spec = RandomBVSpec(seed=3, width_range=(1, 6), left_tail=Fraction(1, 2))
    report = fuzz_inequalities(spec, 5, ["var-bound", "contact", "tail-limit"])
    assert report.verdict == "pass"
    assert report.summary["violations"] == 0
    var_bound = report.summary["checks"]["var-bound"]
    assert var_bound["trials"] == 5
    assert var_bound["max_ratio"] <= 1.0
    assert var_bound["extremal_ratio"] == pytest.approx(1.0)
    assert len(report.rows) == 15


def test_fuzz_fractional_and_continuous_checks():
    spec = RandomBVSpec(seed=4, width_range=(1, 4))
    report = fuzz_inequalities(spec, 3, ["varq-bound", "continuous-var-bound"], beta=Fraction(1, 2))
    assert report.verdict == "pass"
    assert report.summary["checks"]["continuous-var-bound"]["extremal_ratio"] <= 1.0


@pytest.fixture
def always_fails():
    check_registry.register(CheckDefinition(
        id="always-fails",
        name="Always fails",
        category="inequality",
        description="test double",
        statement="false",
        handler=lambda f, beta: CheckReport(
            check="always-fails", instance_digest=function_digest(f), verdict="fail", details={"ratio": 2.0}
        ),
    ))
    yield "always-fails"
    check_registry._checks.pop("always-fails")


def test_fuzz_reports_shrunk_violations(always_fails):
    found = []
    report = fuzz_inequalities(
        RandomBVSpec(seed=5, width_range=(2, 8)), 3, [always_fails],
        on_violation=lambda check, f, detail: found.append((check, f, detail)),
    )
    assert report.verdict == "fail"
    assert report.summary["violations"] == 3
    assert len(found) == 3
    for check, f, detail in found:
        assert check == always_fails
        assert f.width == 1
        assert all(Fraction(v).denominator == 1 for v in f.core_values)
        assert detail["verdict"] == "fail"


def test_shrink_stops_when_nothing_fails():
    f = DiscreteBVFunction.from_values(0, [1, 2, 3, 4])
    assert shrink(f, lambda g: False) == f
    assert shrink(f, lambda g: g.width >= 2).width == 2


def test_probe_zero_family_supports_continuity():
    spec = RandomBVSpec(seed=6, width_range=(1, 4))
    for setting in ("D", "B"):
        report = probe_open_questions(setting, spec, 2, j_max=3, family="zero")
        assert report.verdict == "inconclusive-supporting"
        assert report.summary == {"candidates": 0, "supporting": 2}
        assert all(r["final_distance"] == 0 for r in report.rows)


def test_probe_random_reports_candidates_through_callback():
    found = []
    report = probe_open_questions(
        "D", RandomBVSpec(seed=8, width_range=(1, 4)), 3, j_max=4,
        on_violation=lambda check, f, detail: found.append(check),
    )
    assert report.verdict in ("inconclusive-supporting", "candidate-violation")
    assert len(found) == report.summary["candidates"]
    assert all(check == "question-D" for check in found)
    assert all(r["classification"] in ("supporting", "candidate") for r in report.rows)


def test_probe_validation():
    spec = RandomBVSpec(seed=1)
    with pytest.raises(DomainError):
        probe_open_questions("E", spec, 1)
    with pytest.raises(UnsupportedVariantError):
        probe_open_questions("A", spec, 1, family="thm5")
