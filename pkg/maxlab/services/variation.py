"""
Total variation, q-variation and BV norms on Z and R.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from ..errors import DomainError, UnsupportedVariantError
from .functions import DiscreteBVFunction, PiecewiseLinearFunction, StepFunction
from .scalar import ScaledPower, abs_diff

ContinuousFunction = Union[StepFunction, PiecewiseLinearFunction]


@dataclass(frozen=True)
class IntervalZ:
    """Integer interval ``[a, b]``; ``None`` stands for an infinite end."""

    a: Optional[int] = None
    b: Optional[int] = None

    def __post_init__(self):
        if self.a is not None and self.b is not None and self.a > self.b:
            raise DomainError(f"empty interval [{self.a}, {self.b}]")

    def contains(self, n: int) -> bool:
        return (self.a is None or self.a <= n) and (self.b is None or n <= self.b)


WHOLE_LINE = IntervalZ()


def _window_jumps(f: DiscreteBVFunction, window: IntervalZ):
    # difference at n couples n and n+1, both must lie in the window
    for n, d in f.jumps():
        if (window.a is None or window.a <= n) and (window.b is None or n + 1 <= window.b):
            yield d


def var_discrete(f: DiscreteBVFunction, window: IntervalZ = WHOLE_LINE):
    """Sum of |f(n+1) - f(n)| over consecutive pairs inside the window."""
    total = Fraction(0) if isinstance(f.left_tail, Fraction) else 0.0
    for d in _window_jumps(f, window):
        total += abs(d)
    return total


def varq_power_discrete(f: DiscreteBVFunction, q, window: IntervalZ = WHOLE_LINE):
    """``sum |f(n+1) - f(n)|**q``; exact for integer q on rational data."""
    if q < 1:
        raise DomainError(f"q must be at least 1, got {q}")
    exact = Fraction(q).denominator == 1 and isinstance(f.left_tail, Fraction)
    if exact:
        q = int(q)
        return sum((abs(d) ** q for d in _window_jumps(f, window)), Fraction(0))
    return sum(abs(float(d)) ** float(q) for d in _window_jumps(f, window))


def varq_discrete(f: DiscreteBVFunction, q, window: IntervalZ = WHOLE_LINE):
    """l^q norm of the discrete derivative (float unless q = 1)."""
    if q < 1:
        raise DomainError(f"q must be at least 1, got {q}")
    if q == 1:
        return var_discrete(f, window)
    return float(varq_power_discrete(f, q, window)) ** (1.0 / float(q))


def bvnorm_discrete(f: DiscreteBVFunction):
    return abs(f.left_tail) + var_discrete(f)


def var_continuous(f: ContinuousFunction, window: Optional[Tuple] = None):
    """
    Variation of a step or piecewise-linear function.

    ``window = (L, R)`` restricts to the open interval; ``None`` means all of R.
    """
    lo, hi = window if window is not None else (None, None)
    if lo is not None and hi is not None and lo > hi:
        raise DomainError(f"L > R ({lo} > {hi})")
    if isinstance(f, StepFunction):
        total = 0
        for t, left, right in zip(f.breakpoints, f.piece_values, f.piece_values[1:]):
            if (lo is None or lo < t) and (hi is None or t < hi):
                total += abs(right - left)
        return total
    if isinstance(f, PiecewiseLinearFunction):
        total = 0
        for x0, x1, slope in f.slopes():
            s = x0 if lo is None else max(x0, lo)
            e = x1 if hi is None else min(x1, hi)
            if e > s:
                total += abs(slope) * (e - s)
        return total
    raise UnsupportedVariantError(f"no continuous variation for {type(f).__name__}")


def bvnorm_continuous(f: ContinuousFunction):
    return abs(f.left_tail) + var_continuous(f)


@dataclass(frozen=True)
class SampledProfile:
    """Values of a function at strictly increasing sample points."""

    points: Tuple
    values: Tuple

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise DomainError("points and values differ in length")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise DomainError("sample points must be strictly increasing")

    @classmethod
    def of(cls, f, points: Sequence) -> "SampledProfile":
        return cls(tuple(points), tuple(f(x) for x in points))

    def __len__(self) -> int:
        return len(self.points)

    def __sub__(self, other: "SampledProfile") -> "SampledProfile":
        if self.points != other.points:
            raise DomainError("profiles are sampled on different points")
        return SampledProfile(
            self.points,
            tuple(_difference(a, b) for a, b in zip(self.values, other.values)),
        )


def _difference(a, b):
    if isinstance(a, (ScaledPower, float)) or isinstance(b, (ScaledPower, float)):
        return float(a) - float(b)
    return a - b


def var_profile(g: SampledProfile):
    """Variation of the sampled values (a lower bound for the variation of g)."""
    return sum((abs_diff(b, a) for a, b in zip(g.values, g.values[1:])), 0)


def riesz_partition_sum(g: SampledProfile, q):
    """
    ``sum |g(x_{i+1}) - g(x_i)|**q / |x_{i+1} - x_i|**(q-1)``.

    Exact for integer q on rational samples, float otherwise.
    """
    if q <= 1:
        raise DomainError(f"Riesz q-variation needs q > 1, got {q}")
    exact = Fraction(q).denominator == 1 and all(
        isinstance(v, (int, Fraction)) for v in g.values + g.points
    )
    if exact:
        q = int(q)
        return sum(
            (abs(v1 - v0) ** q / (x1 - x0) ** (q - 1)
             for (x0, v0), (x1, v1) in zip(zip(g.points, g.values), zip(g.points[1:], g.values[1:]))),
            Fraction(0),
        )
    qf = float(q)
    return sum(
        abs(float(v1) - float(v0)) ** qf / (float(x1) - float(x0)) ** (qf - 1.0)
        for (x0, v0), (x1, v1) in zip(zip(g.points, g.values), zip(g.points[1:], g.values[1:]))
    )


def varq_riesz(g: Union[PiecewiseLinearFunction, SampledProfile], q) -> float:
    """
    Riesz q-variation.

    Closed form for piecewise-linear g: (sum |slope|**q * length)**(1/q). For a
    sampled profile the partition sum is a lower bound that grows under
    refinement.
    """
    if q <= 1:
        raise DomainError(f"Riesz q-variation needs q > 1, got {q}")
    qf = float(q)
    if isinstance(g, PiecewiseLinearFunction):
        total = sum(abs(float(s)) ** qf * float(x1 - x0) for x0, x1, s in g.slopes())
        return total ** (1.0 / qf)
    if isinstance(g, SampledProfile):
        return float(riesz_partition_sum(g, q)) ** (1.0 / qf)
    raise UnsupportedVariantError(f"no Riesz variation for {type(g).__name__}")
