import math
from fractions import Fraction

import pytest

from maxlab.errors import DomainError
from maxlab.services.functions import DiscreteBVFunction
from maxlab.services.generators import RandomBVSpec, random_bv, random_pwl
from maxlab.services.variation import (
    IntervalZ,
    SampledProfile,
    bvnorm_discrete,
    riesz_partition_sum,
    var_continuous,
    var_discrete,
    varq_discrete,
    varq_riesz,
)


def test_var_discrete_of_delta(delta):
    assert var_discrete(delta) == 2
    assert var_discrete(delta, IntervalZ(0, None)) == 1
    assert var_discrete(delta, IntervalZ(None, 0)) == 1
    assert var_discrete(delta, IntervalZ(1, 10)) == 0


def test_bv_norm_includes_left_tail():
    step_up = DiscreteBVFunction.from_runs(3, [(Fraction(1, 2), 1)], 0, Fraction(1, 2))
    assert var_discrete(step_up) == Fraction(1, 2)
    assert bvnorm_discrete(step_up) == Fraction(1, 2)
    shifted = DiscreteBVFunction.from_runs(0, [(Fraction(2), 1)], 1, 1)
    assert bvnorm_discrete(shifted) == 3


def test_varq_discrete(delta):
    assert varq_discrete(delta, 1) == 2
    assert math.isclose(varq_discrete(delta, 2), math.sqrt(2))
    with pytest.raises(DomainError):
        varq_discrete(delta, Fraction(1, 2))


def test_var_continuous(unit_step, tent):
    assert var_continuous(unit_step) == 2
    assert var_continuous(unit_step, (Fraction(1, 2), 5)) == 1
    assert var_continuous(tent) == 2
    assert var_continuous(tent, (Fraction(-1, 2), Fraction(1, 2))) == 1


def test_riesz_variation(tent):
    assert math.isclose(varq_riesz(tent, 2), math.sqrt(2))
    two_points = SampledProfile((0, 2), (0, 1))
    assert riesz_partition_sum(two_points, 2) == Fraction(1, 2)
    with pytest.raises(DomainError):
        varq_riesz(tent, 1)


def test_sampled_profile_validation():
    with pytest.raises(DomainError):
        SampledProfile((1, 0), (0, 0))
    with pytest.raises(DomainError):
        IntervalZ(3, 1)


SPLIT = RandomBVSpec(seed=3, width_range=(1, 10), left_tail=Fraction(1, 4), right_tail=Fraction(-1, 2))
UNIT_JUMPS = RandomBVSpec(seed=5, width_range=(1, 10), value_range=(Fraction(0), Fraction(1)))
PWL = RandomBVSpec(seed=9, width_range=(1, 6))


@pytest.mark.parametrize("trial", range(25))
def test_discrete_variation_splits_additively(trial):
    f = random_bv(SPLIT, trial)
    lo, hi = f.core_lo - 2, f.core_hi + 2
    for b in range(lo, hi + 1):
        assert var_discrete(f, IntervalZ(lo, hi)) == var_discrete(f, IntervalZ(lo, b)) + var_discrete(f, IntervalZ(b, hi))
        assert var_discrete(f) == var_discrete(f, IntervalZ(None, b)) + var_discrete(f, IntervalZ(b, None))


@pytest.mark.parametrize("trial", range(25))
def test_continuous_variation_splits_additively(trial):
    f = random_pwl(PWL, trial)
    a, c = f.xs[0] - 1, f.xs[-1] + 1
    for k in range(1, 16):
        b = a + (c - a) * Fraction(k, 16)
        assert var_continuous(f, (a, c)) == var_continuous(f, (a, b)) + var_continuous(f, (b, c))
    assert var_continuous(f) == var_continuous(f, (a, c))


@pytest.mark.parametrize("trial", range(25))
@pytest.mark.parametrize("q", [Fraction(3, 2), 2, 3])
def test_q_variation_below_variation_for_small_jumps(trial, q):
    f = random_bv(UNIT_JUMPS, trial)
    assert all(abs(d) <= 1 for _, d in f.jumps())
    assert varq_discrete(f, q) <= float(var_discrete(f)) * (1 + 1e-12)


def _samples(f, lo, step, count):
    points = [lo + step * k for k in range(count + 1)]
    return SampledProfile.of(f, points)


@pytest.mark.parametrize("trial", range(20))
def test_riesz_sums_grow_under_refinement(trial):
    f = random_pwl(PWL, trial)
    lo = f.xs[0] - 1
    span = int((f.xs[-1] + 1 - lo) * 2) + 1
    coarse = _samples(f, lo, Fraction(1, 2), span)
    fine = _samples(f, lo, Fraction(1, 4), 2 * span)
    finer = _samples(f, lo, Fraction(1, 8), 4 * span)
    assert riesz_partition_sum(coarse, 2) <= riesz_partition_sum(fine, 2) <= riesz_partition_sum(finer, 2)
    q = Fraction(3, 2)
    assert riesz_partition_sum(coarse, q) <= riesz_partition_sum(fine, q) * (1 + 1e-12)
    # on a partition containing every node the sum is the closed form
    assert varq_riesz(finer, 2) == pytest.approx(varq_riesz(f, 2), rel=1e-12)
