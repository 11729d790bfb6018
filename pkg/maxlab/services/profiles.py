"""
Whole-line discrete maximal functions.

Right of the core the uncentered classical maximal function has the closed
form ``max(c, B + max_l E_l / (n - l + 1))`` where ``l`` runs over run starts,
``B = |f(+inf)|`` and ``c`` is the limit. The centered operator has the same
shape with denominators ``2n + 1 - 2m``; fractional operators (zero tails)
reduce to ``max_l S_l * (kappa*n + d_l)**(beta-1)``. The left side is the right
side of the reflected function. A profile stores exact values on a finite
window wide enough that each tail has settled into either a constant or a
single strictly decreasing curve, which makes every variation over Z exact.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

from ..errors import DomainError, UnsupportedVariantError
from .functions import DiscreteBVFunction, OperatorVariant, Side
from .maxdisc import AbsSegments, maximal_discrete
from .parallel import parallel_map
from .scalar import abs_diff, compare, diff, fractional_average
from .variation import WHOLE_LINE, IntervalZ

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TailForm:
    """Settled tail: the constant ``limit`` or the curve ``level + coeff / (kappa*n + offset)``."""

    limit: Any
    level: Any = None
    coeff: Any = None
    offset: Any = None
    kappa: int = 1

    @property
    def is_constant(self) -> bool:
        return self.coeff is None

    def value(self, n: int):
        if self.is_constant:
            return self.limit
        return self.level + self.coeff / (self.kappa * n + self.offset)


@dataclass(frozen=True)
class TailModel:
    """Right tail of a maximal function, valid for ``n >= start``."""

    start: int
    kappa: int
    beta: Any
    level: Any
    limit: Any
    terms: Tuple[Tuple[Any, int], ...]

    def value(self, n: int):
        if n < self.start:
            raise DomainError(f"tail model starts at {self.start}, asked for {n}")
        if self.beta == 0:
            best = self.limit
            for coeff, offset in self.terms:
                if coeff > 0:
                    v = self.level + coeff / (self.kappa * n + offset)
                    if v > best:
                        best = v
            return best
        best = 0 * self.limit
        for coeff, offset in self.terms:
            v = fractional_average(coeff, self.kappa * n + offset, self.beta)
            if compare(v, best) > 0:
                best = v
        return best

    def settle(self) -> Tuple[int, Optional[TailForm]]:
        """First n from which the tail is a single closed form, and that form."""
        if self.beta != 0:
            return self.start, None
        positives = [(e, d) for e, d in self.terms if e > 0]
        if not positives:
            return self.start, TailForm(limit=self.limit)
        top, top_offset = max(positives, key=lambda t: (t[0], -t[1]))
        settle = self.start
        for coeff, offset in positives:
            if coeff < top:
                crossing = (coeff * top_offset - top * offset) / (self.kappa * (top - coeff))
                settle = max(settle, math.ceil(crossing))
        gap = self.limit - self.level
        if gap > 0:
            settle = max(settle, math.ceil((top / gap - top_offset) / self.kappa))
            return settle, TailForm(limit=self.limit)
        return settle, TailForm(
            limit=self.limit, level=self.level, coeff=top, offset=top_offset, kappa=self.kappa
        )

    def step_bound(self, n: int) -> float:
        """Upper bound of |P(m) - P(m+1)| for every m >= n."""
        beta = float(self.beta)
        bound = 0.0
        for coeff, offset in self.terms:
            if coeff > 0:
                base = self.kappa * n + offset
                bound = max(bound, float(coeff) * (1 - beta) * self.kappa * float(base) ** (beta - 2))
        return bound


def right_tail_model(f: DiscreteBVFunction, centered: bool, beta) -> TailModel:
    hi = f.core_hi
    table = AbsSegments(f, f.core_lo, hi)
    a, b = abs(f.left_tail), abs(f.right_tail)
    kappa = 2 if centered else 1
    terms = []
    for start in table.starts:
        total = table.sum(start, hi)
        coeff = total - b * (hi - start + 1) if beta == 0 else total
        offset = 1 - kappa * start
        terms.append((coeff, offset))
    if beta != 0:
        level = limit = 0 * b
    elif centered:
        level, limit = b, max(b, (a + b) / 2)
    else:
        level, limit = b, max(a, b)
    return TailModel(hi + 1, kappa, beta, level, limit, tuple(terms))


@dataclass(frozen=True)
class DifferenceMetrics:
    variation: Any
    sup: Any


def _tail_difference(p: TailForm, q: TailForm, start: int) -> Tuple[Any, Any]:
    """Variation and sup of ``p - q`` on ``[start, inf)``."""
    lim = p.limit - q.limit
    first = p.value(start) - q.value(start)
    if p.is_constant and q.is_constant:
        return 0 * lim, abs(first)
    if p.is_constant or q.is_constant:
        return abs(lim - first), max(abs(first), abs(lim))
    if p.kappa != q.kappa:
        raise UnsupportedVariantError("profiles of different operators")
    kappa = p.kappa
    e1, d1, e2, d2 = p.coeff, p.offset, q.coeff, q.offset
    # sign of the increment at u = kappa*n is the sign of this quadratic
    qa = e2 - e1
    qb = e2 * (2 * d1 + kappa) - e1 * (2 * d2 + kappa)
    qc = e2 * d1 * (d1 + kappa) - e1 * d2 * (d2 + kappa)
    if qa != 0:
        root_bound = 1 + max(abs(qb / qa), abs(qc / qa))
    elif qb != 0:
        root_bound = abs(qc / qb) + 1
    else:
        root_bound = 0
    stop = max(start, math.floor(root_bound / kappa) + 2)
    total, sup, prev = 0 * lim, abs(first), first
    for n in range(start + 1, stop + 1):
        cur = p.value(n) - q.value(n)
        total += abs(cur - prev)
        sup = max(sup, abs(cur))
        prev = cur
    return total + abs(lim - prev), max(sup, abs(lim))


@dataclass(frozen=True)
class DiscreteMaximalProfile:
    """Exact maximal function of ``f`` on all of Z."""

    f: DiscreteBVFunction
    variant: OperatorVariant
    explicit_lo: int
    values: Tuple[Any, ...]
    left: TailModel
    right: TailModel
    left_form: Optional[TailForm]
    right_form: Optional[TailForm]

    @property
    def explicit_hi(self) -> int:
        return self.explicit_lo + len(self.values) - 1

    @property
    def limits(self) -> Tuple[Any, Any]:
        return self.left.limit, self.right.limit

    def value(self, n: int):
        if n < self.explicit_lo:
            return self.left.value(-n)
        if n > self.explicit_hi:
            return self.right.value(n)
        return self.values[n - self.explicit_lo]

    __call__ = value

    def is_constant(self) -> bool:
        first = self.values[0]
        return (
            self.left_form is not None
            and self.left_form.is_constant
            and self.right_form.is_constant
            and all(v == first for v in self.values)
        )

    def variation(self, window: IntervalZ = WHOLE_LINE):
        """Exact Var of the profile over a (possibly infinite) integer interval."""
        a, b = window.a, window.b
        lo, hi = self.explicit_lo, self.explicit_hi
        total = 0
        m_lo = lo if a is None else max(a, lo)
        m_hi = hi if b is None else min(b, hi)
        for n in range(m_lo, m_hi):
            total += abs_diff(self.value(n + 1), self.value(n))
        # tails are monotone beyond the explicit window
        if b is None or b > hi:
            start = hi if a is None else max(hi, a)
            end = self.right.limit if b is None else self.value(b)
            total += abs_diff(end, self.value(start))
        if a is None or a < lo:
            start = lo if b is None else min(lo, b)
            end = self.left.limit if a is None else self.value(a)
            total += abs_diff(self.value(start), end)
        return total

    def varq_bounds(self, q) -> Tuple[float, float]:
        """
        Lower and upper bounds for the l^q variation over Z.

        The lower bound sums the explicit window; the upper bound adds
        ``sup|step|**(q-1) * Var(tail)`` on each side.
        """
        qf = float(q)
        if qf < 1:
            raise DomainError(f"q must be at least 1, got {q}")
        vals = [float(v) for v in self.values]
        inner = sum(abs(y - x) ** qf for x, y in zip(vals, vals[1:]))
        right_var = abs(vals[-1] - float(self.right.limit))
        left_var = abs(vals[0] - float(self.left.limit))
        outer = (
            self.right.step_bound(self.explicit_hi) ** (qf - 1) * right_var
            + self.left.step_bound(-self.explicit_lo) ** (qf - 1) * left_var
        )
        return inner ** (1 / qf), (inner + outer) ** (1 / qf)

    def _require_classical(self) -> None:
        if self.left_form is None or self.right_form is None:
            raise UnsupportedVariantError("exact tail analysis needs a classical profile")

    def difference(self, other: "DiscreteMaximalProfile") -> DifferenceMetrics:
        """Exact Var and sup of ``self - other`` over Z."""
        self._require_classical()
        other._require_classical()
        if self.variant.centered != other.variant.centered:
            raise UnsupportedVariantError("profiles of different operators")
        lo = min(self.explicit_lo, other.explicit_lo)
        hi = max(self.explicit_hi, other.explicit_hi)
        gaps = [diff(self.value(n), other.value(n)) for n in range(lo, hi + 1)]
        total = sum((abs(y - x) for x, y in zip(gaps, gaps[1:])), 0)
        sup = max(abs(g) for g in gaps)
        right_var, right_sup = _tail_difference(self.right_form, other.right_form, hi)
        left_var, left_sup = _tail_difference(self.left_form, other.left_form, -lo)
        return DifferenceMetrics(total + right_var + left_var, max(sup, right_sup, left_sup))

    def sup_distance(self, other: "DiscreteMaximalProfile"):
        return self.difference(other).sup

    def derivative(self, n: int):
        return diff(self.value(n + 1), self.value(n))

    def explicit_points(self) -> List[int]:
        return list(range(self.explicit_lo, self.explicit_hi + 1))


def maximal_function_discrete(
    f: DiscreteBVFunction,
    variant: OperatorVariant = OperatorVariant(),
    margin: int = 1,
) -> DiscreteMaximalProfile:
    """Build the whole-line profile; ``margin`` widens the explicit window on both sides."""
    if variant.side is not Side.TWO_SIDED:
        raise UnsupportedVariantError("one-sided operators are defined on R only")
    beta = variant.beta_for(f.mode)
    if beta != 0 and not f.has_zero_tails:
        raise DomainError("fractional maximal function of a function with nonzero tails is infinite")
    right = right_tail_model(f, variant.centered, beta)
    left = right_tail_model(f.reflect(), variant.centered, beta)
    right_settle, right_form = right.settle()
    left_settle, left_form = left.settle()
    lo = min(f.core_lo - 1, -left_settle) - margin
    hi = max(f.core_hi + 1, right_settle) + margin
    values = parallel_map(lambda n: maximal_discrete(f, n, variant).value, range(lo, hi + 1))
    logger.debug("profile %s: explicit window [%d, %d]", variant.describe(), lo, hi)
    return DiscreteMaximalProfile(
        f=f,
        variant=variant,
        explicit_lo=lo,
        values=tuple(values),
        left=left,
        right=right,
        left_form=left_form,
        right_form=right_form,
    )
