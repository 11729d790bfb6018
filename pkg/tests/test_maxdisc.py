import math
from fractions import Fraction

import pytest

from maxlab.errors import DomainError, UnsupportedVariantError
from maxlab.services.counterexamples import Setting, build_sequence
from maxlab.services.functions import DiscreteBVFunction, OperatorVariant, Side
from maxlab.services.generators import RandomBVSpec, random_bv
from maxlab.services.maxdisc import (
    DiscreteWindow,
    TailSide,
    maximal_discrete,
    maximal_profile_discrete,
    window_average_discrete,
)
from maxlab.services.scalar import ScalarMode, compare, power_value
from maxlab.services.variation import IntervalZ

from tests.oracles import brute_discrete

HALF = Fraction(1, 2)


def test_delta_fractional_values(delta):
    variant = OperatorVariant(beta=HALF)
    at_0 = maximal_discrete(delta, 0, variant)
    at_1 = maximal_discrete(delta, 1, variant)
    assert at_0.value == 1
    assert at_0.window == DiscreteWindow(0, 0)
    assert at_1.value == power_value(1, 2, -HALF)
    assert at_1.window == DiscreteWindow(0, 1)


def test_delta_classical_values(delta):
    for n in range(-5, 6):
        assert maximal_discrete(delta, n).value == Fraction(1, abs(n) + 1)
    assert maximal_discrete(delta, 3).window == DiscreteWindow(0, 3)
    assert maximal_discrete(delta, 2, OperatorVariant(centered=True)).value == Fraction(1, 5)


def test_tail_limit_witness():
    f = DiscreteBVFunction.from_runs(0, [(0, 1)], 1, 1)
    evaluation = maximal_discrete(f, 0)
    assert evaluation.value == 1
    assert evaluation.window is None
    assert evaluation.tail_limit is TailSide.LEFT


def test_fractional_with_nonzero_tails_diverges():
    f = DiscreteBVFunction.from_runs(0, [(2, 1)], 1, 0)
    evaluation = maximal_discrete(f, 0, OperatorVariant(beta=HALF))
    assert evaluation.divergent
    assert math.isinf(float(evaluation))


def test_one_sided_is_continuous_only(delta):
    with pytest.raises(UnsupportedVariantError):
        maximal_discrete(delta, 0, OperatorVariant(side=Side.RIGHT))


def test_window_average(delta):
    assert window_average_discrete(delta, 0, 1, 2) == Fraction(1, 4)
    assert window_average_discrete(delta, 0, 0, 3, HALF) == power_value(1, 4, -HALF)


@pytest.mark.parametrize("trial", range(60))
@pytest.mark.parametrize("centered", [False, True])
def test_classical_matches_brute_force(trial, centered):
    f = random_bv(RandomBVSpec(seed=11, width_range=(1, 6), left_tail=Fraction(1, 2), right_tail=Fraction(-1, 4)), trial)
    variant = OperatorVariant(centered=centered)
    for n in range(f.core_lo - 3, f.core_hi + 4):
        exact = maximal_discrete(f, n, variant).value
        assert math.isclose(float(exact), brute_discrete(f, n, centered), rel_tol=1e-12)


@pytest.mark.parametrize("trial", range(60))
@pytest.mark.parametrize("centered", [False, True])
def test_fractional_matches_brute_force(trial, centered):
    f = random_bv(RandomBVSpec(seed=5, width_range=(1, 6)), trial)
    variant = OperatorVariant(centered=centered, beta=HALF)
    for n in range(f.core_lo - 3, f.core_hi + 4):
        exact = maximal_discrete(f, n, variant).value
        assert math.isclose(float(exact), brute_discrete(f, n, centered, HALF), rel_tol=1e-12)


@pytest.mark.parametrize("trial", range(6))
def test_run_compression_does_not_change_values(trial):
    f = random_bv(RandomBVSpec(seed=2, width_range=(4, 10), denominator=1), trial)
    for variant in (OperatorVariant(), OperatorVariant(centered=True, beta=Fraction(1, 3))):
        for n in range(f.core_lo - 2, f.core_hi + 3):
            compressed = maximal_discrete(f, n, variant)
            plain = maximal_discrete(f, n, variant, compress_runs=False)
            assert compressed.value == plain.value


def test_f64_mode_agrees_with_rational():
    f = random_bv(RandomBVSpec(seed=3, width_range=(3, 8)), 0)
    g = f.to_f64()
    for n in range(f.core_lo - 2, f.core_hi + 3):
        exact = maximal_discrete(f, n, OperatorVariant(beta=HALF)).value
        approx = maximal_discrete(g, n, OperatorVariant(beta=0.5)).value
        assert isinstance(approx, float)
        assert math.isclose(float(exact), approx, rel_tol=1e-12)
    assert maximal_discrete(g, 0).value == pytest.approx(float(maximal_discrete(f, 0).value))


def test_profile_of_delta(delta):
    profile = maximal_profile_discrete(delta, IntervalZ(-3, 3))
    assert [n for n, _ in profile.evaluations] == list(range(-3, 4))
    assert [e.value for _, e in profile.evaluations] == [Fraction(1, abs(n) + 1) for n in range(-3, 4)]
    assert profile.tail_values == (0, 0)


def test_profile_needs_a_finite_range(delta):
    with pytest.raises(DomainError):
        maximal_profile_discrete(delta, IntervalZ(0, None))


@pytest.mark.parametrize("j", [1, 2, 3])
def test_profile_of_record_member_is_flat_at_0_and_1(j):
    pair = build_sequence(Setting.THM5, HALF, 3)
    f, h = pair.member(j), pair.height(j)
    profile = maximal_profile_discrete(f, IntervalZ(0, 1), OperatorVariant(beta=HALF))
    (_, at_0), (_, at_1) = profile.evaluations
    assert compare(at_0.value, at_1.value) == 0
    assert at_0.window == DiscreteWindow(0, h)


def test_profile_with_tails_reports_tail_values():
    f = DiscreteBVFunction.from_runs(0, [(3, 2)], 1, -2)
    profile = maximal_profile_discrete(f, IntervalZ(-2, 3))
    assert profile.tail_values == (2, 2)
    centered = maximal_profile_discrete(f, IntervalZ(-2, 3), OperatorVariant(centered=True))
    assert centered.tail_values == (Fraction(3, 2), 2)
    for n, evaluation in profile.evaluations:
        assert math.isclose(float(evaluation.value), brute_discrete(f, n), rel_tol=1e-12)
