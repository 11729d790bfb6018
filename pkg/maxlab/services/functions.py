"""
Function representations and the operator variant.

- DiscreteBVFunction: f : Z -> R, constant tails outside a finite core. The
  core is stored run-length encoded so members with millions of equal cells
  (the counterexample sequences) stay cheap.
- StepFunction: piecewise-constant f : R -> R with finitely many jumps.
- PiecewiseLinearFunction: continuous, linear between nodes, constant tails.

All three are immutable and canonical: equal functions have equal fields.
"""

import enum
import functools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from ..errors import (
    DomainError,
    InvalidFunctionError,
    ScalarModeError,
    UnsupportedVariantError,
)
from .scalar import (
    Scalar,
    ScalarMode,
    check_beta,
    coerce,
    common_mode,
)

Run = Tuple[Scalar, int]
Segment = Tuple[int, int, Scalar]


def _zero(mode: ScalarMode) -> Scalar:
    return Fraction(0) if mode is ScalarMode.RATIONAL else 0.0


def _merge_runs(runs: Iterable[Run]) -> List[Run]:
    merged: List[Run] = []
    for value, length in runs:
        if length <= 0:
            continue
        if merged and merged[-1][0] == value:
            merged[-1] = (value, merged[-1][1] + length)
        else:
            merged.append((value, length))
    return merged


@dataclass(frozen=True)
class DiscreteBVFunction:
    core_lo: int
    runs: Tuple[Run, ...]
    left_tail: Scalar
    right_tail: Scalar
    mode: ScalarMode = ScalarMode.RATIONAL

    @classmethod
    def from_runs(
        cls,
        core_lo: int,
        runs: Iterable[Run],
        left_tail=0,
        right_tail=0,
        mode: Optional[ScalarMode] = None,
    ) -> "DiscreteBVFunction":
        runs = [(value, int(length)) for value, length in runs]
        if not runs:
            raise InvalidFunctionError("core must contain at least one cell")
        if any(length <= 0 for _, length in runs):
            raise InvalidFunctionError("run lengths must be positive")
        if mode is None:
            mode = common_mode([left_tail, right_tail] + [v for v, _ in runs])
        a = coerce(left_tail, mode)
        b = coerce(right_tail, mode)
        merged = _merge_runs((coerce(v, mode), n) for v, n in runs)
        lo = int(core_lo)

        while len(merged) > 1 and merged[0][0] == a:
            lo += merged[0][1]
            merged.pop(0)
        while len(merged) > 1 and merged[-1][0] == b:
            merged.pop()
        value, length = merged[0]
        if len(merged) == 1:
            if value == a and value == b:
                lo, merged = 0, [(value, 1)]
            elif value == a:
                # a up to the run end, b afterwards: first b cell is the core
                lo, merged = lo + length, [(b, 1)]
            elif value == b:
                merged = [(value, 1)]
        return cls(lo, tuple(merged), a, b, mode)

    @classmethod
    def from_values(
        cls,
        core_lo: int,
        core_values: Sequence,
        left_tail=0,
        right_tail=0,
        mode: Optional[ScalarMode] = None,
    ) -> "DiscreteBVFunction":
        return cls.from_runs(core_lo, [(v, 1) for v in core_values], left_tail, right_tail, mode)

    @classmethod
    def constant(cls, value, mode: Optional[ScalarMode] = None) -> "DiscreteBVFunction":
        return cls.from_runs(0, [(value, 1)], value, value, mode)

    @classmethod
    def indicator(cls, lo: int, hi: int, c=1, mode: Optional[ScalarMode] = None) -> "DiscreteBVFunction":
        """``c * chi_[lo, hi]``."""
        if lo > hi:
            raise DomainError(f"empty indicator range [{lo}, {hi}]")
        mode = mode or common_mode([c])
        zero = _zero(mode)
        return cls.from_runs(lo, [(c, hi - lo + 1)], zero, zero, mode)

    @functools.cached_property
    def run_starts(self) -> Tuple[int, ...]:
        starts, pos = [], self.core_lo
        for _, length in self.runs:
            starts.append(pos)
            pos += length
        return tuple(starts)

    @property
    def width(self) -> int:
        return sum(length for _, length in self.runs)

    @property
    def core_hi(self) -> int:
        return self.core_lo + self.width - 1

    @property
    def core_values(self) -> Tuple[Scalar, ...]:
        return tuple(v for v, n in self.runs for _ in range(n))

    @property
    def has_zero_tails(self) -> bool:
        return self.left_tail == 0 and self.right_tail == 0

    def evaluate(self, n: int) -> Scalar:
        if n < self.core_lo:
            return self.left_tail
        if n > self.core_hi:
            return self.right_tail
        return self.runs[bisect_right(self.run_starts, n) - 1][0]

    __call__ = evaluate

    def segments(self, lo: int, hi: int) -> List[Segment]:
        """Maximal constant pieces ``(start, end, value)`` covering ``[lo, hi]``."""
        if lo > hi:
            raise DomainError(f"empty range [{lo}, {hi}]")
        pieces: List[Segment] = []
        if lo < self.core_lo:
            pieces.append((lo, min(hi, self.core_lo - 1), self.left_tail))
        for start, (value, length) in zip(self.run_starts, self.runs):
            s, e = max(start, lo), min(start + length - 1, hi)
            if s <= e:
                pieces.append((s, e, value))
        if hi > self.core_hi:
            pieces.append((max(lo, self.core_hi + 1), hi, self.right_tail))
        return pieces

    def jumps(self) -> List[Tuple[int, Scalar]]:
        """Nonzero differences ``(n, f(n+1) - f(n))``."""
        out = []
        prev = self.left_tail
        for start, (value, _) in zip(self.run_starts, self.runs):
            if value != prev:
                out.append((start - 1, value - prev))
            prev = value
        if self.right_tail != prev:
            out.append((self.core_hi, self.right_tail - prev))
        return out

    def _combine(self, other: "DiscreteBVFunction", op: Callable) -> "DiscreteBVFunction":
        if self.mode is not other.mode:
            raise ScalarModeError("cannot combine rational and f64 functions")
        lo = min(self.core_lo, other.core_lo)
        hi = max(self.core_hi, other.core_hi)
        cuts = {lo, hi + 1, *self.run_starts, *other.run_starts}
        cuts |= {end + 1 for end in (self.core_hi, other.core_hi) if end < hi}
        cuts = sorted(cuts)
        runs = [
            (op(self.evaluate(s), other.evaluate(s)), e - s)
            for s, e in zip(cuts, cuts[1:])
        ]
        return DiscreteBVFunction.from_runs(
            lo,
            runs,
            op(self.left_tail, other.left_tail),
            op(self.right_tail, other.right_tail),
            self.mode,
        )

    def __add__(self, other: "DiscreteBVFunction") -> "DiscreteBVFunction":
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: "DiscreteBVFunction") -> "DiscreteBVFunction":
        return self._combine(other, lambda x, y: x - y)

    def scale(self, c) -> "DiscreteBVFunction":
        c = coerce(c, self.mode)
        return DiscreteBVFunction.from_runs(
            self.core_lo,
            [(c * v, n) for v, n in self.runs],
            c * self.left_tail,
            c * self.right_tail,
            self.mode,
        )

    def __neg__(self) -> "DiscreteBVFunction":
        return self.scale(-1)

    def abs(self) -> "DiscreteBVFunction":
        return DiscreteBVFunction.from_runs(
            self.core_lo,
            [(abs(v), n) for v, n in self.runs],
            abs(self.left_tail),
            abs(self.right_tail),
            self.mode,
        )

    def reflect(self) -> "DiscreteBVFunction":
        """``n -> f(-n)``."""
        return DiscreteBVFunction.from_runs(
            -self.core_hi,
            list(reversed(self.runs)),
            self.right_tail,
            self.left_tail,
            self.mode,
        )

    def add_indicator(self, lo: int, hi: int, c) -> "DiscreteBVFunction":
        return self + DiscreteBVFunction.indicator(lo, hi, coerce(c, self.mode), self.mode)

    def to_f64(self) -> "DiscreteBVFunction":
        """Float64 copy of the same function."""
        return DiscreteBVFunction.from_runs(
            self.core_lo,
            [(float(v), n) for v, n in self.runs],
            float(self.left_tail),
            float(self.right_tail),
            ScalarMode.F64,
        )


def delta_at_origin(mode: ScalarMode = ScalarMode.RATIONAL) -> DiscreteBVFunction:
    """The unit impulse at 0."""
    return DiscreteBVFunction.indicator(0, 0, coerce(1, mode), mode)


@dataclass(frozen=True)
class StepFunction:
    """
    Piecewise-constant function on R.

    ``piece_values[i]`` holds on ``(breakpoints[i-1], breakpoints[i])``; at a
    breakpoint the function takes the adjacent value of larger magnitude (the
    right one on ties), so ``chi_[0, 1]`` is the closed indicator.
    """

    breakpoints: Tuple[Scalar, ...]
    piece_values: Tuple[Scalar, ...]
    mode: ScalarMode = ScalarMode.RATIONAL

    @classmethod
    def create(
        cls, breakpoints: Sequence, piece_values: Sequence, mode: Optional[ScalarMode] = None
    ) -> "StepFunction":
        if len(piece_values) != len(breakpoints) + 1:
            raise InvalidFunctionError("need exactly one more piece than breakpoints")
        if mode is None:
            mode = common_mode(list(breakpoints) + list(piece_values))
        bps = [coerce(t, mode) for t in breakpoints]
        vals = [coerce(v, mode) for v in piece_values]
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise InvalidFunctionError("breakpoints must be strictly increasing")
        keep_bps, keep_vals = [], [vals[0]]
        for t, v in zip(bps, vals[1:]):
            if v == keep_vals[-1]:
                continue
            keep_bps.append(t)
            keep_vals.append(v)
        return cls(tuple(keep_bps), tuple(keep_vals), mode)

    @classmethod
    def indicator(cls, lo, hi, c=1, mode: Optional[ScalarMode] = None) -> "StepFunction":
        if lo >= hi:
            raise DomainError(f"empty indicator interval [{lo}, {hi}]")
        mode = mode or common_mode([lo, hi, c])
        return cls.create((lo, hi), (0, c, 0), mode)

    @property
    def left_tail(self) -> Scalar:
        return self.piece_values[0]

    @property
    def right_tail(self) -> Scalar:
        return self.piece_values[-1]

    @property
    def has_zero_tails(self) -> bool:
        return self.left_tail == 0 and self.right_tail == 0

    def piece_index(self, x) -> int:
        """Index of the piece whose open interval contains ``x`` (right piece at a breakpoint)."""
        return bisect_right(self.breakpoints, x)

    def side_values(self, x) -> Tuple[Scalar, Scalar]:
        """Values just left and just right of ``x``."""
        return self.piece_values[bisect_left(self.breakpoints, x)], self.piece_values[self.piece_index(x)]

    def evaluate(self, x) -> Scalar:
        left, right = self.side_values(x)
        return left if abs(left) > abs(right) else right

    __call__ = evaluate

    def pieces(self) -> List[Tuple[Optional[Scalar], Optional[Scalar], Scalar]]:
        """``(lo, hi, value)`` with ``None`` for infinite ends."""
        ends = [None, *self.breakpoints, None]
        return [(ends[i], ends[i + 1], v) for i, v in enumerate(self.piece_values)]

    def integral_abs(self, lo, hi):
        """Integral of |f| over [lo, hi]."""
        if lo > hi:
            raise DomainError(f"L > R in integral ({lo} > {hi})")
        total = _zero(self.mode)
        for a, b, v in self.pieces():
            s = lo if a is None else max(a, lo)
            e = hi if b is None else min(b, hi)
            if e > s:
                total += (e - s) * abs(v)
        return total

    def _combine(self, other: "StepFunction", op: Callable) -> "StepFunction":
        if self.mode is not other.mode:
            raise ScalarModeError("cannot combine rational and f64 functions")
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        samples = _piece_samples(bps)
        values = [op(self.piece_values[self.piece_index(p)], other.piece_values[other.piece_index(p)]) for p in samples]
        return StepFunction.create(bps, values, self.mode)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self._combine(other, lambda x, y: x - y)

    def scale(self, c) -> "StepFunction":
        c = coerce(c, self.mode)
        return StepFunction.create(self.breakpoints, [c * v for v in self.piece_values], self.mode)

    def abs(self) -> "StepFunction":
        return StepFunction.create(self.breakpoints, [abs(v) for v in self.piece_values], self.mode)

    def reflect(self) -> "StepFunction":
        return StepFunction.create(
            [-t for t in reversed(self.breakpoints)], list(reversed(self.piece_values)), self.mode
        )

    def add_indicator(self, lo, hi, c) -> "StepFunction":
        return self + StepFunction.indicator(coerce(lo, self.mode), coerce(hi, self.mode), coerce(c, self.mode), self.mode)


def _piece_samples(bps: Sequence) -> List:
    """One interior point per piece of the partition given by ``bps``."""
    if not bps:
        return [0]
    points = [bps[0] - 1]
    points += [(a + b) / 2 for a, b in zip(bps, bps[1:])]
    points.append(bps[-1] + 1)
    return points


@dataclass(frozen=True)
class PiecewiseLinearFunction:
    """Continuous piecewise-linear function, constant left of the first and right of the last node."""

    nodes: Tuple[Tuple[Scalar, Scalar], ...]
    mode: ScalarMode = ScalarMode.RATIONAL

    @classmethod
    def create(cls, nodes: Sequence, mode: Optional[ScalarMode] = None) -> "PiecewiseLinearFunction":
        if not nodes:
            raise InvalidFunctionError("need at least one node")
        if mode is None:
            mode = common_mode([c for node in nodes for c in node])
        pts = [(coerce(x, mode), coerce(y, mode)) for x, y in nodes]
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise InvalidFunctionError("node abscissae must be strictly increasing")
        while len(pts) > 1 and pts[0][1] == pts[1][1]:
            pts.pop(0)
        while len(pts) > 1 and pts[-1][1] == pts[-2][1]:
            pts.pop()
        kept = [pts[0]]
        for i in range(1, len(pts) - 1):
            (x0, y0), (x1, y1), (x2, y2) = kept[-1], pts[i], pts[i + 1]
            if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
                kept.append(pts[i])
        if len(pts) > 1:
            kept.append(pts[-1])
        return cls(tuple(kept), mode)

    @classmethod
    def tent(cls, center=0, half_width=1, height=1, mode: Optional[ScalarMode] = None) -> "PiecewiseLinearFunction":
        if half_width <= 0:
            raise DomainError("tent half width must be positive")
        zero = 0
        return cls.create(
            [(center - half_width, zero), (center, height), (center + half_width, zero)], mode
        )

    @property
    def xs(self) -> Tuple[Scalar, ...]:
        return tuple(x for x, _ in self.nodes)

    @property
    def ys(self) -> Tuple[Scalar, ...]:
        return tuple(y for _, y in self.nodes)

    @property
    def left_tail(self) -> Scalar:
        return self.nodes[0][1]

    @property
    def right_tail(self) -> Scalar:
        return self.nodes[-1][1]

    @property
    def has_zero_tails(self) -> bool:
        return self.left_tail == 0 and self.right_tail == 0

    def evaluate(self, x) -> Scalar:
        xs = self.xs
        if x <= xs[0]:
            return self.left_tail
        if x >= xs[-1]:
            return self.right_tail
        i = bisect_right(xs, x) - 1
        (x0, y0), (x1, y1) = self.nodes[i], self.nodes[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    __call__ = evaluate

    def slopes(self) -> List[Tuple[Scalar, Scalar, Scalar]]:
        """``(x_i, x_{i+1}, slope)`` for every finite piece."""
        return [
            (x0, x1, (y1 - y0) / (x1 - x0))
            for (x0, y0), (x1, y1) in zip(self.nodes, self.nodes[1:])
        ]

    def derivative(self, x) -> Optional[Scalar]:
        """Slope at ``x``; ``None`` at a node where the slope jumps."""
        zero = _zero(self.mode)
        xs = self.xs
        if x < xs[0] or x > xs[-1]:
            return zero
        pieces = self.slopes()
        for x0, x1, s in pieces:
            if x0 < x < x1:
                return s
        i = xs.index(x)
        left = pieces[i - 1][2] if i > 0 else zero
        right = pieces[i][2] if i < len(pieces) else zero
        return left if left == right else None

    def abs(self) -> "PiecewiseLinearFunction":
        pts = [self.nodes[0]]
        for (x0, y0), (x1, y1) in zip(self.nodes, self.nodes[1:]):
            if (y0 < 0 < y1) or (y1 < 0 < y0):
                pts.append((x0 + (x1 - x0) * y0 / (y0 - y1), _zero(self.mode)))
            pts.append((x1, y1))
        return PiecewiseLinearFunction.create([(x, abs(y)) for x, y in pts], self.mode)

    def integral_abs(self, lo, hi):
        """Integral of |f| over [lo, hi] (trapezoids on |f|, constant tails)."""
        if lo > hi:
            raise DomainError(f"L > R in integral ({lo} > {hi})")
        g = self.abs()
        xs = g.xs
        total = _zero(self.mode)
        if lo < xs[0]:
            total += (min(hi, xs[0]) - lo) * g.left_tail
        if hi > xs[-1]:
            total += (hi - max(lo, xs[-1])) * g.right_tail
        for x0, x1, _ in g.slopes():
            s, e = max(x0, lo), min(x1, hi)
            if e > s:
                total += (e - s) * (g.evaluate(s) + g.evaluate(e)) / 2
        return total

    def _combine(self, other: "PiecewiseLinearFunction", op: Callable) -> "PiecewiseLinearFunction":
        if self.mode is not other.mode:
            raise ScalarModeError("cannot combine rational and f64 functions")
        xs = sorted(set(self.xs) | set(other.xs))
        return PiecewiseLinearFunction.create(
            [(x, op(self.evaluate(x), other.evaluate(x))) for x in xs], self.mode
        )

    def __add__(self, other: "PiecewiseLinearFunction") -> "PiecewiseLinearFunction":
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: "PiecewiseLinearFunction") -> "PiecewiseLinearFunction":
        return self._combine(other, lambda x, y: x - y)

    def scale(self, c) -> "PiecewiseLinearFunction":
        c = coerce(c, self.mode)
        return PiecewiseLinearFunction.create([(x, c * y) for x, y in self.nodes], self.mode)

    def shift(self, dx) -> "PiecewiseLinearFunction":
        dx = coerce(dx, self.mode)
        return PiecewiseLinearFunction.create([(x + dx, y) for x, y in self.nodes], self.mode)

    def reflect(self) -> "PiecewiseLinearFunction":
        return PiecewiseLinearFunction.create([(-x, y) for x, y in reversed(self.nodes)], self.mode)


class Side(str, enum.Enum):
    TWO_SIDED = "two-sided"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class OperatorVariant:
    """Which maximal operator: centered or not, fractional order beta, one- or two-sided."""

    centered: bool = False
    beta: Scalar = field(default=Fraction(0))
    side: Side = Side.TWO_SIDED

    def __post_init__(self):
        if isinstance(self.beta, bool) or not 0 <= self.beta < 1:
            raise DomainError(f"beta must lie in [0, 1), got {self.beta!r}")
        if self.side is not Side.TWO_SIDED and (self.centered or self.beta != 0):
            raise UnsupportedVariantError("one-sided operators are classical and uncentered")

    @property
    def is_classical(self) -> bool:
        return self.beta == 0

    @property
    def q(self):
        """The exponent 1 / (1 - beta) of the fractional variation bound."""
        return 1 / (1 - self.beta)

    def beta_for(self, mode: ScalarMode) -> Scalar:
        return check_beta(self.beta, mode)

    def describe(self) -> str:
        kind = "centered" if self.centered else "uncentered"
        side = "" if self.side is Side.TWO_SIDED else f" {self.side.value}"
        return f"{kind}{side} beta={self.beta}"
