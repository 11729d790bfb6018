"""
Maximal functions on R.

Step functions are evaluated exactly: the window integral is piecewise linear
in each endpoint, so the supremum sits at breakpoints, at the point itself or
at the stationary points of ``(R-L)**(beta-1) * integral`` (which are minima,
but are checked anyway). Piecewise-linear inputs are evaluated in float64:
there the one-sided and centered averages can peak at the root of a quadratic
inside a piece.
"""

import enum
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from .. import config
from ..errors import DomainError, UnsupportedVariantError
from .functions import OperatorVariant, PiecewiseLinearFunction, Side, StepFunction
from .maxdisc import DIVERGENT, MaxEvaluation, TailSide
from .parallel import parallel_map
from .scalar import coerce, compare, fractional_average
from .variation import SampledProfile

ContinuousFunction = Union[StepFunction, PiecewiseLinearFunction]


class WindowKind(str, enum.Enum):
    ATTAINED = "attained"
    SHRINK_LIMIT = "shrink_limit"


@dataclass(frozen=True)
class RealWindow:
    L: Any
    R: Any
    kind: WindowKind = WindowKind.ATTAINED

    @property
    def length(self):
        return self.R - self.L


def window_average_continuous(f: ContinuousFunction, x, r, s, beta=0):
    """``(r+s)**(beta-1) * integral_{x-r}^{x+s} |f|``."""
    if r < 0 or s < 0:
        raise DomainError(f"window offsets must be non-negative, got r={r}, s={s}")
    if r + s == 0:
        if beta == 0:
            raise DomainError("degenerate window for the classical average")
        return 0 * f.left_tail
    return fractional_average(f.integral_abs(x - r, x + s), r + s, beta)


def _select(candidates: List[Tuple[Any, RealWindow]]) -> Tuple[Any, RealWindow]:
    # largest value, then shortest window, then leftmost
    best = None
    for value, window in candidates:
        if best is None:
            best = (value, window)
            continue
        c = compare(value, best[0])
        if c > 0 or (c == 0 and (window.length, window.L) < (best[1].length, best[1].L)):
            best = (value, window)
    return best


def _with_tails(best: Tuple[Any, RealWindow], tails: List[Tuple[Any, TailSide]]) -> MaxEvaluation:
    value, window = best
    top = None
    for tail_value, side in tails:
        if top is None or compare(tail_value, top[0]) > 0:
            top = (tail_value, side)
    if top is not None and compare(top[0], value) > 0:
        return MaxEvaluation(value=top[0], tail_limit=top[1])
    return MaxEvaluation(value=value, window=window)


def _cell_value(f: StepFunction, lo, hi):
    """|f| on the open cell (lo, hi); ``hi`` may be None for an unbounded cell."""
    inside = lo + 1 if hi is None else (lo + hi) / 2
    return abs(f.piece_values[f.piece_index(inside)])


def _step_uncentered(f: StepFunction, x, beta, side: Side) -> MaxEvaluation:
    left_val, right_val = f.side_values(x)
    bps = f.breakpoints
    lefts = [x] if side is Side.RIGHT else sorted({x, *(t for t in bps if t < x)})
    rights = [x] if side is Side.LEFT else sorted({x, *(t for t in bps if t > x)})
    pairs = {(L, R) for L in lefts for R in rights if R > L}

    if beta != 0:
        one_minus = 1 - beta
        for L in lefts:
            for c0, c1 in zip(rights, rights[1:]):
                m = _cell_value(f, c0, c1)
                if m == 0:
                    continue
                p0 = f.integral_abs(L, c0)
                R = (one_minus * p0 + m * L - one_minus * m * c0) / (beta * m)
                if c0 <= R <= c1 and R > L:
                    pairs.add((L, R))
        for R in rights:
            for c0, c1 in zip(lefts, lefts[1:]):
                m = _cell_value(f, c0, c1)
                if m == 0:
                    continue
                q0 = f.integral_abs(c1, R)
                L = (m * R - one_minus * (q0 + m * c1)) / (beta * m)
                if c0 <= L <= c1 and L < R:
                    pairs.add((L, R))

    if beta != 0:
        shrink = 0 * x
    elif side is Side.RIGHT:
        shrink = abs(right_val)
    elif side is Side.LEFT:
        shrink = abs(left_val)
    else:
        shrink = max(abs(left_val), abs(right_val))
    candidates = [(shrink, RealWindow(x, x, WindowKind.SHRINK_LIMIT))]
    for L, R in sorted(pairs):
        candidates.append((fractional_average(f.integral_abs(L, R), R - L, beta), RealWindow(L, R)))
    best = _select(candidates)
    if beta != 0:
        return MaxEvaluation(value=best[0], window=best[1])
    tails = []
    if side is not Side.RIGHT:
        tails.append((abs(f.left_tail), TailSide.LEFT))
    if side is not Side.LEFT:
        tails.append((abs(f.right_tail), TailSide.RIGHT))
    return _with_tails(best, tails)


def _step_centered(f: StepFunction, x, beta) -> MaxEvaluation:
    radii = sorted({abs(t - x) for t in f.breakpoints} - {0})
    left_val, right_val = f.side_values(x)
    shrink = (abs(left_val) + abs(right_val)) / 2 if beta == 0 else 0 * x
    candidates = [(shrink, RealWindow(x, x, WindowKind.SHRINK_LIMIT))]
    chosen = set(radii)
    if beta != 0:
        cells = [0 * x] + radii
        for r0, r1 in zip(cells, cells[1:]):
            mid = (r0 + r1) / 2
            m = abs(f.piece_values[f.piece_index(x + mid)]) + abs(f.piece_values[f.piece_index(x - mid)])
            if m == 0:
                continue
            q0 = f.integral_abs(x - r0, x + r0)
            r = (1 - beta) * (q0 - m * r0) / (beta * m)
            if r0 <= r <= r1 and r > 0:
                chosen.add(r)
    for r in sorted(chosen):
        value = fractional_average(f.integral_abs(x - r, x + r), 2 * r, beta)
        candidates.append((value, RealWindow(x - r, x + r)))
    best = _select(candidates)
    if beta != 0:
        return MaxEvaluation(value=best[0], window=best[1])
    mid_tail = (abs(f.left_tail) + abs(f.right_tail)) / 2
    return _with_tails(best, [(mid_tail, TailSide.CENTERED)])


def step_max_continuous(f: StepFunction, x, variant: OperatorVariant = OperatorVariant()) -> MaxEvaluation:
    """Exact maximal function of a step function at ``x``."""
    beta = variant.beta_for(f.mode)
    x = coerce(x, f.mode)
    if beta != 0 and not f.has_zero_tails:
        return DIVERGENT
    if variant.centered:
        return _step_centered(f, x, beta)
    return _step_uncentered(f, x, beta, variant.side)


class AbsPiecewiseLinear:
    """|f| of a zero-tailed piecewise-linear f in float64, with its antiderivative."""

    def __init__(self, f: PiecewiseLinearFunction):
        if not f.has_zero_tails:
            raise DomainError("one-sided maximal functions need zero tails")
        g = f.abs()
        self.xs = np.array([float(x) for x in g.xs])
        self.ys = np.array([float(y) for y in g.ys])
        widths = np.diff(self.xs)
        self.cum = np.concatenate([[0.0], np.cumsum(widths * (self.ys[:-1] + self.ys[1:]) / 2)])

    @property
    def is_zero(self) -> bool:
        return len(self.xs) < 2

    def value(self, t):
        if self.is_zero:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.interp(t, self.xs, self.ys)

    def antiderivative(self, t):
        """Integral of |f| from -inf to t."""
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t)
        tc = np.clip(t, self.xs[0], self.xs[-1])
        k = np.clip(np.searchsorted(self.xs, tc, side="right") - 1, 0, len(self.xs) - 2)
        return self.cum[k] + (tc - self.xs[k]) * (self.ys[k] + self.value(tc)) / 2

    def slope(self, x: float) -> Optional[float]:
        """Derivative of |f| at x; ``None`` at a kink."""
        if self.is_zero:
            return 0.0
        slopes = np.concatenate([[0.0], np.diff(self.ys) / np.diff(self.xs), [0.0]])
        k = int(np.searchsorted(self.xs, x, side="right"))
        if k >= 1 and x == self.xs[k - 1]:
            left, right = slopes[k - 1], slopes[k]
            return float(right) if abs(left - right) <= config.CMP_EPS else None
        return float(slopes[k])

    def pieces(self):
        for i in range(len(self.xs) - 1):
            x0, x1 = self.xs[i], self.xs[i + 1]
            yield x0, x1, (self.ys[i + 1] - self.ys[i]) / (x1 - x0)


def stationary_offsets(s: float, offset: float, p: float, i0: float, length: float) -> List[float]:
    """
    Offsets t in [0, length] where ``(i0 + p t + s t^2/2) / (offset + t)`` is stationary.

    They are the roots of ``(s/2) t^2 + s*offset*t + (p*offset - i0) = 0``.
    """
    if s == 0:
        return []
    disc = (s * offset) ** 2 - 2 * s * (p * offset - i0)
    if disc < 0:
        return []
    root = math.sqrt(disc)
    out = []
    for t in ((-s * offset + root) / s, (-s * offset - root) / s):
        if 0 <= t <= length:
            out.append(t)
    return out


def right_radius_candidates(g: AbsPiecewiseLinear, x: float) -> List[Tuple[float, float]]:
    """``(radius, average over [x, x + radius])`` for every candidate; radius 0 is the shrink limit."""
    fx = float(g.value(x))
    out = [(0.0, fx)]
    if g.is_zero:
        return out
    big_f = float(g.antiderivative(x))
    for i, y in enumerate(g.xs):
        if y > x:
            out.append((float(y - x), float((g.cum[i] - big_f) / (y - x))))
    for x0, x1, s in g.pieces():
        if x1 <= x:
            continue
        y0 = max(x0, x)
        offset = y0 - x
        p0 = float(g.value(y0))
        i0 = float(g.antiderivative(y0)) - big_f
        for t in stationary_offsets(float(s), offset, p0, i0, float(x1 - y0)):
            r = offset + t
            if r > 0:
                out.append((r, (i0 + p0 * t + s * t * t / 2) / r))
    return out


def _best_radius(candidates: List[Tuple[float, float]]) -> Tuple[float, float]:
    best = None
    for r, value in candidates:
        if best is None:
            best = (r, value)
            continue
        c = compare(value, best[1])
        if c > 0 or (c == 0 and r < best[0]):
            best = (r, value)
    return best


def one_sided_max(f: PiecewiseLinearFunction, x, side: Side = Side.RIGHT) -> MaxEvaluation:
    """
    M_R f(x) = sup_r avg_{[x, x+r]} |f| (M_L by reflection).

    The witness is the smallest maximising radius; radius 0 means the supremum
    is the shrink limit |f(x)|.
    """
    if side is Side.TWO_SIDED:
        raise UnsupportedVariantError("one_sided_max needs side=left or side=right")
    x = float(x)
    if side is Side.LEFT:
        g = AbsPiecewiseLinear(f.reflect())
        r, value = _best_radius(right_radius_candidates(g, -x))
        kind = WindowKind.SHRINK_LIMIT if r == 0 else WindowKind.ATTAINED
        return MaxEvaluation(value=value, window=RealWindow(x - r, x, kind))
    g = AbsPiecewiseLinear(f)
    r, value = _best_radius(right_radius_candidates(g, x))
    kind = WindowKind.SHRINK_LIMIT if r == 0 else WindowKind.ATTAINED
    return MaxEvaluation(value=value, window=RealWindow(x, x + r, kind))


def one_sided_profile(f: PiecewiseLinearFunction, points: Sequence, side: Side = Side.RIGHT) -> np.ndarray:
    """Vectorised M_R (or M_L) on many points; same candidates as ``one_sided_max``."""
    if side is Side.TWO_SIDED:
        raise UnsupportedVariantError("one_sided_profile needs side=left or side=right")
    pts = np.asarray([float(p) for p in points], dtype=float)
    if side is Side.LEFT:
        g, x = AbsPiecewiseLinear(f.reflect()), -pts
    else:
        g, x = AbsPiecewiseLinear(f), pts
    best = g.value(x).astype(float)
    if g.is_zero:
        return best
    big_f = g.antiderivative(x)
    for i, y in enumerate(g.xs):
        ahead = y > x
        r = np.where(ahead, y - x, 1.0)
        best = np.where(ahead, np.maximum(best, (g.cum[i] - big_f) / r), best)
    for x0, x1, s in g.pieces():
        if s >= 0:
            continue
        live = x < x1
        y0 = np.maximum(x0, x)
        offset = y0 - x
        p0 = g.value(y0)
        i0 = g.antiderivative(y0) - big_f
        disc = (s * offset) ** 2 - 2 * s * (p0 * offset - i0)
        root = np.sqrt(np.maximum(disc, 0.0))
        for sign in (1.0, -1.0):
            t = (-s * offset + sign * root) / s
            r = offset + t
            ok = live & (disc >= 0) & (t >= 0) & (t <= x1 - y0) & (r > 0)
            value = (i0 + p0 * t + s * t * t / 2) / np.where(ok, r, 1.0)
            best = np.where(ok, np.maximum(best, value), best)
    return best


def uncentered_max_continuous(f: PiecewiseLinearFunction, x) -> MaxEvaluation:
    """Classical uncentered maximal function: the larger one-sided maximum."""
    right = one_sided_max(f, x, Side.RIGHT)
    left = one_sided_max(f, x, Side.LEFT)
    return left if compare(left.value, right.value) > 0 else right


def centered_max_pwl(f: PiecewiseLinearFunction, x) -> MaxEvaluation:
    """Classical centered maximal function of a zero-tailed piecewise-linear f."""
    g = AbsPiecewiseLinear(f)
    x = float(x)
    candidates = [(0.0, float(g.value(x)))]
    if not g.is_zero:
        radii = sorted({abs(float(y) - x) for y in g.xs} - {0.0})
        integral = lambda r: float(g.antiderivative(x + r) - g.antiderivative(x - r))
        for r in radii:
            candidates.append((r, integral(r) / (2 * r)))
        cells = [0.0] + radii
        for r0, r1 in zip(cells, cells[1:]):
            a1, a2 = float(g.value(x + r0)), float(g.value(x - r0))
            b1 = (float(g.value(x + r1)) - a1) / (r1 - r0)
            b2 = (float(g.value(x - r1)) - a2) / (r1 - r0)
            i0 = integral(r0)
            for t in stationary_offsets(b1 + b2, r0, a1 + a2, i0, r1 - r0):
                r = r0 + t
                if r > 0:
                    candidates.append((r, (i0 + (a1 + a2) * t + (b1 + b2) * t * t / 2) / (2 * r)))
    r, value = _best_radius(candidates)
    kind = WindowKind.SHRINK_LIMIT if r == 0 else WindowKind.ATTAINED
    return MaxEvaluation(value=value, window=RealWindow(x - r, x + r, kind))


def evaluate_continuous(f: ContinuousFunction, x, variant: OperatorVariant = OperatorVariant()) -> MaxEvaluation:
    """Dispatch on the function type and variant."""
    if isinstance(f, StepFunction):
        return step_max_continuous(f, x, variant)
    if not isinstance(f, PiecewiseLinearFunction):
        raise UnsupportedVariantError(f"no maximal function for {type(f).__name__}")
    if variant.beta != 0:
        raise UnsupportedVariantError("fractional operators are evaluated on step functions only")
    if variant.centered:
        return centered_max_pwl(f, x)
    if variant.side is Side.TWO_SIDED:
        return uncentered_max_continuous(f, x)
    return one_sided_max(f, x, variant.side)


def profile_continuous(
    f: ContinuousFunction, grid: Sequence, variant: OperatorVariant = OperatorVariant()
) -> SampledProfile:
    """Maximal function sampled on a strictly increasing grid."""
    points = tuple(grid)
    if any(b <= a for a, b in zip(points, points[1:])):
        raise DomainError("grid must be strictly increasing")
    if isinstance(f, PiecewiseLinearFunction) and not variant.centered and variant.beta == 0:
        if variant.side is Side.TWO_SIDED:
            values = np.maximum(one_sided_profile(f, points, Side.RIGHT), one_sided_profile(f, points, Side.LEFT))
        else:
            values = one_sided_profile(f, points, variant.side)
        return SampledProfile(points, tuple(values.tolist()))
    values = parallel_map(lambda x: evaluate_continuous(f, x, variant).value, points)
    return SampledProfile(points, tuple(values))


def float_grid(lo: float, hi: float, step: float) -> List[float]:
    """Uniform grid from lo to hi (inclusive up to rounding)."""
    if step <= 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise DomainError(f"empty grid [{lo}, {hi}]")
    count = int(math.floor((hi - lo) / step + config.CMP_EPS)) + 1
    return (lo + step * np.arange(count)).tolist()
