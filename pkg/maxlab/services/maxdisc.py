"""
Exact pointwise evaluation of discrete maximal functions.

For a window containing n the objective is ``len**(beta-1) * sum |f|``. Within
a run of constant |f| the objective is quasi-convex in each free endpoint, so
only run boundaries, n itself and the hull ends are candidates. The plain
quadratic scan over every endpoint (``compress_runs=False``) is kept as the
baseline and must agree bit for bit.
"""

import enum
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Any, List, NamedTuple, Optional, Tuple

from ..errors import DomainError, UnsupportedVariantError
from .functions import DiscreteBVFunction, OperatorVariant, Side
from .parallel import parallel_map
from .scalar import compare, fractional_average
from .variation import IntervalZ

logger = logging.getLogger(__name__)


class DiscreteWindow(NamedTuple):
    lo: int
    hi: int

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1


class TailSide(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    CENTERED = "centered"


@dataclass(frozen=True)
class MaxEvaluation:
    """
    Value of a maximal function at one point with its witness.

    ``window`` is the maximising window (DiscreteWindow, or a RealWindow for
    continuous inputs). When the supremum is only approached by windows running
    off to infinity, ``tail_limit`` says which tail and ``window`` is None.
    """

    value: Any
    window: Any = None
    tail_limit: Optional[TailSide] = None
    divergent: bool = False

    def __float__(self) -> float:
        return float(self.value)


DIVERGENT = MaxEvaluation(value=math.inf, divergent=True)


class AbsSegments:
    """Constant pieces of |f| on a hull with prefix sums, O(log k) window sums."""

    def __init__(self, f: DiscreteBVFunction, lo: int, hi: int):
        self.lo, self.hi = lo, hi
        pieces = f.segments(lo, hi)
        self.starts = [s for s, _, _ in pieces]
        self.ends = [e for _, e, _ in pieces]
        self.levels = [abs(v) for _, _, v in pieces]
        self.prefix = [0]
        for s, e, level in zip(self.starts, self.ends, self.levels):
            self.prefix.append(self.prefix[-1] + level * (e - s + 1))

    def _upto(self, x: int):
        # sum over [lo, x - 1]
        if x <= self.lo:
            return 0
        i = bisect_right(self.starts, x - 1) - 1
        return self.prefix[i] + self.levels[i] * (x - self.starts[i])

    def sum(self, l: int, r: int):
        return self._upto(r + 1) - self._upto(l)


def _better(value, window: DiscreteWindow, best_value, best_window: Optional[DiscreteWindow]) -> bool:
    # larger value, then shorter window, then leftmost
    if best_window is None:
        return True
    c = compare(value, best_value)
    if c != 0:
        return c > 0
    return (window.length, window.lo) < (best_window.length, best_window.lo)


def window_average_discrete(f: DiscreteBVFunction, n: int, r: int, s: int, beta=0):
    """``(r+s+1)**(beta-1) * sum_{k=n-r}^{n+s} |f(k)|``."""
    if r < 0 or s < 0:
        raise DomainError(f"window offsets must be non-negative, got r={r}, s={s}")
    table = AbsSegments(f, n - r, n + s)
    return fractional_average(table.sum(n - r, n + s), r + s + 1, beta)


def _pick_tail(best_value, best_window, tails: List[Tuple[Any, TailSide]]) -> MaxEvaluation:
    top = None
    for value, side in tails:
        if top is None or compare(value, top[0]) > 0:
            top = (value, side)
    if top is not None and compare(top[0], best_value) > 0:
        return MaxEvaluation(value=top[0], tail_limit=top[1])
    return MaxEvaluation(value=best_value, window=best_window)


def _uncentered(f: DiscreteBVFunction, n: int, beta, compress_runs: bool) -> MaxEvaluation:
    lo, hi = min(n, f.core_lo), max(n, f.core_hi)
    table = AbsSegments(f, lo, hi)
    if compress_runs:
        lefts = sorted({lo, n, *(s for s in table.starts if s <= n)})
        rights = sorted({hi, n, *(e for e in table.ends if e >= n)})
    else:
        lefts = range(lo, n + 1)
        rights = range(n, hi + 1)
    best_value, best_window = None, None
    for l in lefts:
        for r in rights:
            value = fractional_average(table.sum(l, r), r - l + 1, beta)
            window = DiscreteWindow(l, r)
            if _better(value, window, best_value, best_window):
                best_value, best_window = value, window
    if beta != 0:
        return MaxEvaluation(value=best_value, window=best_window)
    return _pick_tail(
        best_value,
        best_window,
        [(abs(f.left_tail), TailSide.LEFT), (abs(f.right_tail), TailSide.RIGHT)],
    )


def _centered(f: DiscreteBVFunction, n: int, beta, compress_runs: bool) -> MaxEvaluation:
    reach = max(abs(n - f.core_lo), abs(n - f.core_hi))
    table = AbsSegments(f, n - reach, n + reach)
    if compress_runs:
        radii = {0, reach}
        radii.update(n - s for s in table.starts)
        radii.update(e - n for e in table.ends)
        radii = sorted(r for r in radii if 0 <= r <= reach)
    else:
        radii = range(0, reach + 1)
    best_value, best_window = None, None
    for r in radii:
        window = DiscreteWindow(n - r, n + r)
        value = fractional_average(table.sum(n - r, n + r), 2 * r + 1, beta)
        if _better(value, window, best_value, best_window):
            best_value, best_window = value, window
    if beta != 0:
        return MaxEvaluation(value=best_value, window=best_window)
    mid = (abs(f.left_tail) + abs(f.right_tail)) / 2
    return _pick_tail(best_value, best_window, [(mid, TailSide.CENTERED)])


def maximal_discrete(
    f: DiscreteBVFunction,
    n: int,
    variant: OperatorVariant = OperatorVariant(),
    compress_runs: bool = True,
) -> MaxEvaluation:
    """
    Exact value of the (un)centered, possibly fractional, maximal function at n.

    Ties between windows go to the smallest window, then the leftmost. A
    fractional operator on nonzero tails diverges and is reported as such.
    """
    if variant.side is not Side.TWO_SIDED:
        raise UnsupportedVariantError("one-sided operators are defined on R only")
    beta = variant.beta_for(f.mode)
    if beta != 0 and not f.has_zero_tails:
        return DIVERGENT
    if variant.centered:
        return _centered(f, n, beta, compress_runs)
    return _uncentered(f, n, beta, compress_runs)


@dataclass(frozen=True)
class DiscreteProfileResult:
    evaluations: Tuple[Tuple[int, MaxEvaluation], ...]
    tail_values: Tuple[Any, Any]


def tail_values(f: DiscreteBVFunction, variant: OperatorVariant) -> Tuple[Any, Any]:
    """Limits of the maximal function at -inf and +inf."""
    beta = variant.beta_for(f.mode)
    if beta != 0:
        return (math.inf, math.inf) if not f.has_zero_tails else (0 * f.left_tail, 0 * f.left_tail)
    a, b = abs(f.left_tail), abs(f.right_tail)
    if variant.centered:
        mid = (a + b) / 2
        return max(a, mid), max(b, mid)
    c = max(a, b)
    return c, c


def maximal_profile_discrete(
    f: DiscreteBVFunction,
    rng: IntervalZ,
    variant: OperatorVariant = OperatorVariant(),
) -> DiscreteProfileResult:
    """Pointwise evaluations on a finite integer range, in order."""
    if rng.a is None or rng.b is None:
        raise DomainError("profile range must be finite")
    points = list(range(rng.a, rng.b + 1))
    evaluations = parallel_map(lambda n: maximal_discrete(f, n, variant), points)
    logger.debug("profile on [%s, %s] for %s", rng.a, rng.b, variant.describe())
    return DiscreteProfileResult(tuple(zip(points, evaluations)), tail_values(f, variant))
