"""
Seeded random instances for fuzzing and probes.

Trial ``t`` of a RandomBVSpec draws from ``numpy.random.default_rng(SeedSequence([seed, t]))``,
so instances depend only on (spec, trial) and never on the order trials run in.
Values lie on the grid ``k / denominator`` inside ``value_range``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

import numpy as np

from ..errors import DomainError
from .functions import DiscreteBVFunction, PiecewiseLinearFunction, StepFunction
from .scalar import ScalarMode


@dataclass(frozen=True)
class RandomBVSpec:
    seed: int = 42
    width_range: Tuple[int, int] = (1, 12)
    value_range: Tuple[Fraction, Fraction] = (Fraction(-2), Fraction(2))
    denominator: int = 4
    left_tail: Fraction = Fraction(0)
    right_tail: Fraction = Fraction(0)
    core_lo_range: Tuple[int, int] = (-5, 5)
    mode: ScalarMode = ScalarMode.RATIONAL

    def __post_init__(self):
        w0, w1 = self.width_range
        if w0 < 1 or w0 > w1:
            raise DomainError(f"empty width range {self.width_range}")
        v0, v1 = self.value_range
        if v0 > v1:
            raise DomainError(f"empty value range {self.value_range}")
        if self.denominator < 1:
            raise DomainError(f"denominator must be positive, got {self.denominator}")
        if self.core_lo_range[0] > self.core_lo_range[1]:
            raise DomainError(f"empty core offset range {self.core_lo_range}")
        if not self._grid():
            raise DomainError(f"no grid value k/{self.denominator} inside {self.value_range}")

    def _grid(self) -> Tuple[int, int]:
        lo = math.ceil(Fraction(self.value_range[0]) * self.denominator)
        hi = math.floor(Fraction(self.value_range[1]) * self.denominator)
        return (lo, hi) if lo <= hi else ()

    def rng(self, trial: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, trial]))

    def draw_values(self, rng: np.random.Generator, count: int) -> List:
        lo, hi = self._grid()
        ks = rng.integers(lo, hi, size=count, endpoint=True)
        values = [Fraction(int(k), self.denominator) for k in ks]
        if self.mode is ScalarMode.F64:
            return [float(v) for v in values]
        return values

    def cast(self, value):
        return float(value) if self.mode is ScalarMode.F64 else Fraction(value)


def random_bv(spec: RandomBVSpec, trial: int = 0) -> DiscreteBVFunction:
    """Core width uniform in width_range, core start uniform in core_lo_range, tails from the spec."""
    rng = spec.rng(trial)
    width = int(rng.integers(spec.width_range[0], spec.width_range[1], endpoint=True))
    core_lo = int(rng.integers(spec.core_lo_range[0], spec.core_lo_range[1], endpoint=True))
    values = spec.draw_values(rng, width)
    return DiscreteBVFunction.from_values(
        core_lo, values, spec.cast(spec.left_tail), spec.cast(spec.right_tail), spec.mode
    )


def _breakpoints(spec: RandomBVSpec, rng: np.random.Generator, count: int) -> List:
    # strictly increasing, gaps k/denominator with k in 1..denominator
    start = int(rng.integers(spec.core_lo_range[0], spec.core_lo_range[1], endpoint=True))
    gaps = rng.integers(1, spec.denominator, size=count, endpoint=True)
    points, x = [], Fraction(start)
    for g in gaps:
        points.append(x)
        x += Fraction(int(g), spec.denominator)
    return [spec.cast(p) for p in points]


def random_step(spec: RandomBVSpec, trial: int = 0) -> StepFunction:
    """Step function with width_range-many inner pieces and the configured tails."""
    rng = spec.rng(trial)
    width = int(rng.integers(spec.width_range[0], spec.width_range[1], endpoint=True))
    bps = _breakpoints(spec, rng, width + 1)
    values = [spec.cast(spec.left_tail)] + spec.draw_values(rng, width) + [spec.cast(spec.right_tail)]
    return StepFunction.create(bps, values, spec.mode)


def random_pwl(spec: RandomBVSpec, trial: int = 0) -> PiecewiseLinearFunction:
    """Zero-tailed piecewise-linear function with width_range-many interior nodes."""
    rng = spec.rng(trial)
    width = int(rng.integers(spec.width_range[0], spec.width_range[1], endpoint=True))
    xs = _breakpoints(spec, rng, width + 2)
    zero = spec.cast(0)
    ys = [zero] + spec.draw_values(rng, width) + [zero]
    return PiecewiseLinearFunction.create(list(zip(xs, ys)), spec.mode)


def shrink_candidates(f: DiscreteBVFunction) -> List[DiscreteBVFunction]:
    """
    Smaller relatives of ``f`` for violation shrinking: each half of the core,
    then the core rounded to coarser grids (halves, then integers).
    """
    out = []
    values = list(f.core_values)
    if len(values) > 1:
        mid = len(values) // 2
        out.append(DiscreteBVFunction.from_values(f.core_lo, values[:mid], f.left_tail, f.right_tail, f.mode))
        out.append(DiscreteBVFunction.from_values(f.core_lo + mid, values[mid:], f.left_tail, f.right_tail, f.mode))
    for den in (2, 1):
        rounded = [_round_to(v, den, f.mode) for v in values]
        if rounded != values:
            out.append(DiscreteBVFunction.from_values(f.core_lo, rounded, f.left_tail, f.right_tail, f.mode))
    return out


def _round_to(value, den: int, mode: ScalarMode):
    r = Fraction(round(Fraction(value) * den), den)
    return float(r) if mode is ScalarMode.F64 else r
