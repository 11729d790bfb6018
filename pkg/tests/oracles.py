"""Brute-force references for the maximal operators."""

from fractions import Fraction
from itertools import accumulate

from maxlab.services.functions import DiscreteBVFunction, PiecewiseLinearFunction, Side, StepFunction


def brute_discrete(f: DiscreteBVFunction, n: int, centered: bool = False, beta=0, pad: int = 8) -> float:
    """Every window inside a padded hull, plus the tail limits of the classical operator."""
    lo, hi = min(n, f.core_lo) - pad, max(n, f.core_hi) + pad
    prefix = [0.0] + list(accumulate(abs(float(f(k))) for k in range(lo, hi + 1)))

    def total(l, r):
        return prefix[r - lo + 1] - prefix[l - lo]

    if centered:
        reach = min(n - lo, hi - n)
        windows = [(n - r, n + r) for r in range(reach + 1)]
    else:
        windows = [(l, r) for l in range(lo, n + 1) for r in range(n, hi + 1)]
    best = 0.0
    for l, r in windows:
        best = max(best, total(l, r) * (r - l + 1) ** (float(beta) - 1))
    if beta == 0:
        a, b = abs(float(f.left_tail)), abs(float(f.right_tail))
        best = max(best, (a + b) / 2 if centered else max(a, b))
    return best


def brute_step(f: StepFunction, x, step=Fraction(1, 4), pad: int = 4, centered: bool = False, beta=0) -> float:
    """
    Maximal function of a step function whose breakpoints and ``x`` lie on the
    ``step`` grid. Window averages are quasi-convex in each endpoint between
    breakpoints, so the best window has grid endpoints.
    """
    bps = list(f.breakpoints) or [x]
    lo, hi = min(bps[0], x) - pad, max(bps[-1], x) + pad
    exponent = float(beta) - 1
    left, right = f.side_values(x)
    a, b = abs(float(f.left_tail)), abs(float(f.right_tail))
    if beta != 0:
        best = 0.0
    elif centered:
        best = max((abs(float(left)) + abs(float(right))) / 2, (a + b) / 2)
    else:
        best = max(abs(float(left)), abs(float(right)), a, b)
    if centered:
        reach = max(x - lo, hi - x)
        for k in range(1, int(reach / step) + 1):
            r = k * step
            best = max(best, float(f.integral_abs(x - r, x + r)) * float(2 * r) ** exponent)
        return best
    count = int((hi - lo) / step)
    grid = [lo + k * step for k in range(count + 1)]
    for L in (p for p in grid if p <= x):
        for R in (p for p in grid if p >= x and p > L):
            best = max(best, float(f.integral_abs(L, R)) * float(R - L) ** exponent)
    return best


def brute_one_sided(f: PiecewiseLinearFunction, x, side: Side = Side.RIGHT, step=Fraction(1, 64)) -> float:
    """Sup over radii on the ``step`` grid of the one-sided average of |f|, and |f(x)|."""
    best = abs(float(f(x)))
    far = f.xs[-1] - x if side is Side.RIGHT else x - f.xs[0]
    for k in range(1, int(max(far, 0) / step) + 2):
        r = k * step
        window = (x, x + r) if side is Side.RIGHT else (x - r, x)
        best = max(best, float(f.integral_abs(*window) / r))
    return best
