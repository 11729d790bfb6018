"""
Scalar arithmetic shared by every module.

Two modes exist: exact rationals (``fractions.Fraction``) and float64 with a
comparison tolerance. Integers are neutral and adopt the mode of whatever they
are combined with. Fractional-power window values ``S * len**(beta - 1)`` with
rational ``beta`` stay exact as :class:`ScaledPower`.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

from .. import config
from ..errors import DomainError, ScalarModeError

Scalar = Union[Fraction, float]


class ScalarMode(str, enum.Enum):
    RATIONAL = "rational"
    F64 = "f64"


def mode_of(value) -> Optional[ScalarMode]:
    """Mode of a single value; ``None`` for plain integers."""
    if isinstance(value, bool):
        raise ScalarModeError(f"booleans are not scalars: {value!r}")
    if isinstance(value, int):
        return None
    if isinstance(value, (Fraction, ScaledPower)):
        return ScalarMode.RATIONAL
    if isinstance(value, float):
        return ScalarMode.F64
    raise ScalarModeError(f"not a scalar: {value!r}")


def common_mode(values: Iterable, default: ScalarMode = ScalarMode.RATIONAL) -> ScalarMode:
    found: Optional[ScalarMode] = None
    for value in values:
        mode = mode_of(value)
        if mode is None:
            continue
        if found is None:
            found = mode
        elif mode is not found:
            raise ScalarModeError("rational and f64 values cannot be mixed")
    return found or default


def coerce(value, mode: ScalarMode) -> Scalar:
    """Convert ``value`` into ``mode``; refuses to silently round floats into rationals."""
    if isinstance(value, bool):
        raise ScalarModeError(f"booleans are not scalars: {value!r}")
    if mode is ScalarMode.RATIONAL:
        if isinstance(value, float):
            raise ScalarModeError(f"float {value!r} given in rational mode")
        if isinstance(value, ScaledPower):
            raise ScalarModeError("fractional powers are not rationals")
        return Fraction(value)
    return float(value)


def parse_scalar(text, mode: ScalarMode = ScalarMode.RATIONAL) -> Scalar:
    """
    Parse user input: "p/q", decimal strings, ints, floats or Fractions.

    In rational mode decimals are read exactly ("0.1" is 1/10).
    """
    try:
        if isinstance(text, str):
            exact = Fraction(text.strip())
        elif isinstance(text, float):
            if not math.isfinite(text):
                raise DomainError(f"non-finite scalar: {text!r}")
            exact = Fraction(repr(text)) if mode is ScalarMode.RATIONAL else None
            if exact is None:
                return text
        else:
            exact = Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise DomainError(f"cannot parse scalar {text!r}: {e}")
    return exact if mode is ScalarMode.RATIONAL else float(exact)


def to_text(value) -> Union[str, float]:
    """JSON form: rationals as "p/q" strings, floats as numbers."""
    if isinstance(value, float):
        return value
    if isinstance(value, ScaledPower):
        return float(value)
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _tolerance_compare(x: float, y: float, eps: Optional[float]) -> int:
    if math.isinf(x) or math.isinf(y):
        return (x > y) - (x < y)
    tol = (config.CMP_EPS if eps is None else eps) * max(1.0, abs(x), abs(y))
    if abs(x - y) <= tol:
        return 0
    return 1 if x > y else -1


def compare(a, b, eps: Optional[float] = None) -> int:
    """
    Three-way comparison.

    Exact whenever both sides are exact (ints, Fractions, ScaledPowers); as soon as a
    float is involved both sides are compared as floats within the tolerance.
    """
    if isinstance(a, float) or isinstance(b, float):
        return _tolerance_compare(float(a), float(b), eps)
    if isinstance(a, ScaledPower) or isinstance(b, ScaledPower):
        return ScaledPower.compare_exact(a, b)
    return (a > b) - (a < b)


def is_zero(value) -> bool:
    return compare(value, 0) == 0


def abs_diff(a, b):
    """|a - b|, exact for rationals and float otherwise."""
    if isinstance(a, (ScaledPower, float)) or isinstance(b, (ScaledPower, float)):
        return abs(float(a) - float(b))
    return abs(a - b)


def diff(a, b):
    if isinstance(a, (ScaledPower, float)) or isinstance(b, (ScaledPower, float)):
        return float(a) - float(b)
    return a - b


def maximum(values: Iterable):
    best = None
    for value in values:
        if best is None or compare(value, best) > 0:
            best = value
    return best


@dataclass(frozen=True, eq=False)
class ScaledPower:
    """
    Exact non-negative value ``coeff * base**exponent`` with rational parts.

    Ordering raises both sides to the common denominator of their exponents, so
    every comparison is carried out on Fractions. Past
    ``config.EXACT_POWER_DENOMINATOR_CAP`` (decimal betas such as 0.123457) the
    logarithms are compared as floats within ``config.CMP_EPS``.
    """

    coeff: Fraction
    base: Fraction
    exponent: Fraction

    def __post_init__(self):
        if self.coeff < 0:
            raise DomainError("ScaledPower coefficient must be non-negative")
        if self.base <= 0:
            raise DomainError("ScaledPower base must be positive")

    def __float__(self) -> float:
        return float(self.coeff) * float(self.base) ** float(self.exponent)

    def __repr__(self) -> str:
        return f"ScaledPower({self.coeff} * {self.base}^({self.exponent}))"

    @staticmethod
    def _parts(value) -> Tuple[Fraction, Fraction, Fraction]:
        if isinstance(value, ScaledPower):
            return value.coeff, value.base, value.exponent
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return Fraction(value), Fraction(1), Fraction(0)
        raise ScalarModeError(f"cannot compare ScaledPower with {value!r}")

    @classmethod
    def compare_exact(cls, a, b) -> int:
        c1, b1, e1 = cls._parts(a)
        c2, b2, e2 = cls._parts(b)
        sign1 = (c1 > 0) - (c1 < 0)
        sign2 = (c2 > 0) - (c2 < 0)
        if sign1 != sign2:
            return (sign1 > sign2) - (sign1 < sign2)
        if sign1 == 0:
            return 0
        u = math.lcm(e1.denominator, e2.denominator)
        if u > config.EXACT_POWER_DENOMINATOR_CAP:
            x = math.log(abs(c1)) + float(e1) * math.log(b1)
            y = math.log(abs(c2)) + float(e2) * math.log(b2)
            result = _tolerance_compare(x, y, None)
            return result if sign1 > 0 else -result
        x = abs(c1) ** u * b1 ** int(e1 * u)
        y = abs(c2) ** u * b2 ** int(e2 * u)
        result = (x > y) - (x < y)
        return result if sign1 > 0 else -result

    def __eq__(self, other):
        try:
            return self.compare_exact(self, other) == 0
        except ScalarModeError:
            if isinstance(other, float):
                return _tolerance_compare(float(self), other, None) == 0
            return NotImplemented

    __hash__ = None

    def _cmp(self, other) -> int:
        if isinstance(other, float):
            return _tolerance_compare(float(self), other, None)
        return self.compare_exact(self, other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0


def power_value(coeff, base, exponent):
    """``coeff * base**exponent`` collapsed to a Fraction whenever that is exact."""
    coeff, base, exponent = Fraction(coeff), Fraction(base), Fraction(exponent)
    if coeff == 0 or base == 1:
        return coeff
    if exponent.denominator == 1:
        return coeff * base ** int(exponent)
    return ScaledPower(coeff, base, exponent)


def fractional_average(total, length, beta):
    """
    ``length**(beta - 1) * total``: the plain average for ``beta == 0``.

    Exact for rational inputs; float64 as soon as any input is a float.
    """
    if length <= 0:
        raise DomainError("window length must be positive")
    if beta == 0:
        if isinstance(total, float) or isinstance(length, float):
            return float(total) / float(length)
        return Fraction(total) / Fraction(length)
    if any(isinstance(v, float) for v in (total, length, beta)):
        return float(total) * float(length) ** (float(beta) - 1.0)
    return power_value(total, length, Fraction(beta) - 1)


def check_beta(beta, mode: ScalarMode) -> Scalar:
    """Validate ``0 <= beta < 1`` and its compatibility with ``mode``."""
    if isinstance(beta, bool) or not isinstance(beta, (int, Fraction, float)):
        raise DomainError(f"beta must be a scalar, got {beta!r}")
    if not 0 <= beta < 1:
        raise DomainError(f"beta must lie in [0, 1), got {beta}")
    if beta == 0:
        return Fraction(0) if mode is ScalarMode.RATIONAL else 0.0
    if mode is ScalarMode.RATIONAL and isinstance(beta, float):
        raise ScalarModeError("float beta given for a rational-mode function")
    return coerce(beta, mode)
