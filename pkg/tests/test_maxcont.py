import math
from fractions import Fraction

import numpy as np
import pytest

from maxlab.errors import DomainError, UnsupportedVariantError
from maxlab.services.functions import OperatorVariant, PiecewiseLinearFunction, Side, StepFunction
from maxlab.services.generators import RandomBVSpec, random_pwl, random_step
from maxlab.services.maxcont import (
    RealWindow,
    WindowKind,
    evaluate_continuous,
    float_grid,
    one_sided_max,
    one_sided_profile,
    profile_continuous,
    step_max_continuous,
    window_average_continuous,
)
from maxlab.services.scalar import power_value

from tests.oracles import brute_one_sided, brute_step

HALF = Fraction(1, 2)


def test_step_uncentered_classical(unit_step):
    outside = step_max_continuous(unit_step, 2)
    assert outside.value == Fraction(1, 2)
    assert outside.window == RealWindow(0, 2)
    inside = step_max_continuous(unit_step, HALF)
    assert inside.value == 1
    assert inside.window.kind is WindowKind.SHRINK_LIMIT


def test_step_centered_shrink_limit_averages_both_sides(unit_step):
    evaluation = step_max_continuous(unit_step, 0, OperatorVariant(centered=True))
    assert evaluation.value == HALF
    assert evaluation.window.kind is WindowKind.SHRINK_LIMIT


def test_step_fractional(unit_step):
    variant = OperatorVariant(beta=HALF)
    assert step_max_continuous(unit_step, 0, variant).value == 1
    at_2 = step_max_continuous(unit_step, 2, variant)
    assert at_2.value == power_value(1, 2, -HALF)
    assert (at_2.window.L, at_2.window.R) == (0, 2)


def test_step_fractional_with_tails_diverges():
    f = StepFunction.create([0], [1, 0])
    assert step_max_continuous(f, 0, OperatorVariant(beta=HALF)).divergent


def test_window_average_continuous(unit_step):
    assert window_average_continuous(unit_step, 1, 1, 1) == HALF
    with pytest.raises(DomainError):
        window_average_continuous(unit_step, 0, 0, 0)


@pytest.mark.parametrize("trial", range(20))
def test_step_matches_grid_search(trial):
    f = random_step(RandomBVSpec(seed=31, width_range=(1, 4), left_tail=Fraction(1, 4)), trial)
    for k in range(-24, 40, 3):
        x = Fraction(k, 4)
        exact = step_max_continuous(f, x).value
        assert math.isclose(float(exact), brute_step(f, x), rel_tol=1e-12)


ZERO_TAILED = RandomBVSpec(seed=43, width_range=(1, 4))
TAILED_STEPS = RandomBVSpec(seed=47, width_range=(1, 4), left_tail=Fraction(1, 2), right_tail=Fraction(-3, 4))


@pytest.mark.parametrize("trial", range(30))
def test_centered_step_matches_grid_search(trial):
    f = random_step(TAILED_STEPS, trial)
    variant = OperatorVariant(centered=True)
    for k in range(-24, 40, 3):
        x = Fraction(k, 4)
        exact = step_max_continuous(f, x, variant).value
        assert math.isclose(float(exact), brute_step(f, x, centered=True), rel_tol=1e-12)


@pytest.mark.parametrize("trial", range(10))
@pytest.mark.parametrize("centered", [False, True])
@pytest.mark.parametrize("beta", [HALF, Fraction(1, 3)])
def test_fractional_step_matches_grid_search(trial, centered, beta):
    f = random_step(ZERO_TAILED, trial)
    variant = OperatorVariant(centered=centered, beta=beta)
    for k in range(-24, 40, 4):
        x = Fraction(k, 4)
        exact = step_max_continuous(f, x, variant).value
        assert math.isclose(float(exact), brute_step(f, x, pad=1, centered=centered, beta=beta), rel_tol=1e-12)


def test_tent_one_sided_value_and_radius(tent):
    right = one_sided_max(tent, -1, Side.RIGHT)
    assert right.value == pytest.approx(2 - math.sqrt(2), abs=1e-12)
    assert right.window.length == pytest.approx(math.sqrt(2), abs=1e-9)
    left = one_sided_max(tent, 1, Side.LEFT)
    assert left.value == pytest.approx(2 - math.sqrt(2), abs=1e-12)


def test_tent_peak(tent):
    assert evaluate_continuous(tent, 0).value == pytest.approx(1.0)
    assert evaluate_continuous(tent, 0, OperatorVariant(centered=True)).value == pytest.approx(1.0)
    with pytest.raises(UnsupportedVariantError):
        evaluate_continuous(tent, 0, OperatorVariant(beta=HALF))


@pytest.mark.parametrize("trial", range(4))
def test_vectorised_profile_matches_pointwise(trial):
    f = random_pwl(RandomBVSpec(seed=37, width_range=(1, 5)), trial)
    points = float_grid(float(f.xs[0]) - 1, float(f.xs[-1]) + 1, 0.125)
    for side in (Side.RIGHT, Side.LEFT):
        vectorised = one_sided_profile(f, points, side)
        pointwise = np.array([one_sided_max(f, x, side).value for x in points])
        assert np.allclose(vectorised, pointwise, atol=1e-12)


def test_profile_continuous(tent, unit_step):
    grid = float_grid(-2, 2, 0.5)
    sampled = profile_continuous(tent, grid)
    assert len(sampled) == len(grid)
    assert sampled.values[grid.index(0.0)] == pytest.approx(1.0)
    exact = profile_continuous(unit_step, [Fraction(k, 2) for k in range(-2, 5)])
    assert exact.values[0] == Fraction(1, 2)
    with pytest.raises(DomainError):
        profile_continuous(tent, [1.0, 0.0])


def test_float_grid():
    assert float_grid(0, 1, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(DomainError):
        float_grid(0, 1, 0)


def test_pwl_one_sided_needs_zero_tails():
    f = PiecewiseLinearFunction.create([(0, 0), (1, 1)])
    with pytest.raises(DomainError):
        one_sided_max(f, 0)


@pytest.mark.parametrize("trial", range(8))
@pytest.mark.parametrize("side", [Side.RIGHT, Side.LEFT])
def test_one_sided_matches_radius_grid(trial, side):
    f = random_pwl(RandomBVSpec(seed=53, width_range=(1, 4)), trial)
    lo, hi = f.xs[0] - 1, f.xs[-1] + 1
    for k in range(6):
        x = Fraction(math.floor((lo + (hi - lo) * Fraction(k, 5)) * 4), 4)
        exact = float(one_sided_max(f, x, side).value)
        grid = brute_one_sided(f, x, side, step=Fraction(1, 128))
        # a radius grid only sees values the exact supremum dominates
        assert grid <= exact + 1e-12
        assert exact - grid <= 2e-3
