from fractions import Fraction

import pytest

from maxlab.errors import DomainError
from maxlab.schemas import function_digest
from maxlab.services.functions import DiscreteBVFunction
from maxlab.services.generators import RandomBVSpec, random_bv, random_pwl, random_step, shrink_candidates
from maxlab.services.scalar import ScalarMode


def test_instances_depend_only_on_seed_and_trial(spec):
    assert random_bv(spec, 3) == random_bv(spec, 3)
    assert random_bv(spec, 3) == random_bv(RandomBVSpec(seed=7, width_range=(1, 6)), 3)
    digests = {function_digest(random_bv(spec, t)) for t in range(10)}
    assert len(digests) > 1


def test_values_lie_on_the_grid(spec):
    for trial in range(20):
        f = random_bv(spec, trial)
        assert f.width <= 6
        for v in f.core_values:
            assert (v * 4).denominator == 1
            assert -2 <= v <= 2


def test_tails_follow_the_spec():
    spec = RandomBVSpec(seed=1, left_tail=Fraction(1, 2), right_tail=Fraction(-1))
    f = random_bv(spec, 0)
    assert (f.left_tail, f.right_tail) == (Fraction(1, 2), Fraction(-1))
    g = random_step(spec, 0)
    assert (g.left_tail, g.right_tail) == (Fraction(1, 2), Fraction(-1))
    assert random_pwl(spec, 0).has_zero_tails


def test_f64_spec():
    f = random_bv(RandomBVSpec(seed=1, mode=ScalarMode.F64), 0)
    assert f.mode is ScalarMode.F64
    assert all(isinstance(v, float) for v in f.core_values)


def test_step_breakpoints_increase():
    g = random_step(RandomBVSpec(seed=9, width_range=(5, 5)), 2)
    assert all(b > a for a, b in zip(g.breakpoints, g.breakpoints[1:]))
    assert all((t * 4).denominator == 1 for t in g.breakpoints)


@pytest.mark.parametrize("kwargs", [
    {"width_range": (0, 3)},
    {"width_range": (4, 2)},
    {"value_range": (Fraction(1), Fraction(-1))},
    {"value_range": (Fraction(1, 8), Fraction(1, 8))},
    {"denominator": 0},
    {"core_lo_range": (2, 1)},
])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        RandomBVSpec(**kwargs)


def test_shrink_candidates():
    f = DiscreteBVFunction.from_values(0, [Fraction(1, 4), Fraction(3, 4), Fraction(1)])
    candidates = shrink_candidates(f)
    assert len(candidates) == 4
    assert candidates[0] == DiscreteBVFunction.from_values(0, [Fraction(1, 4)])
    assert candidates[1] == DiscreteBVFunction.from_values(1, [Fraction(3, 4), Fraction(1)])
    assert candidates[-1] == DiscreteBVFunction.from_values(0, [0, 1, 1])
    assert shrink_candidates(DiscreteBVFunction.indicator(0, 0, 2)) == []
