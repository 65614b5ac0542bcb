"""Exact arithmetic for the number classes the engine supports symbolically.

Targets reduce, after construction, to exact rationals or quadratic
irrationals ``(a + b*sqrt(d))/c``.  All coordinate values of lattice
vectors therefore live in ``Q`` or a real quadratic field, where signs,
equality and floors are decidable exactly.  This module provides that
decidable layer plus the one algebraic primitive the rest of the engine
needs: deciding whether a rational combination of logarithms of such
numbers vanishes exactly (``log_combo_is_zero``), which is what turns
"interval comparison stuck at max precision" into an exact tie instead
of a failure.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .intervals import GUARD_BITS, Interval

_FLOOR_PREC_CAP = 1 << 20


@lru_cache(maxsize=None)
def squarefree_part(d: int) -> tuple[int, int]:
    """Decompose ``d = f**2 * d0`` with ``d0`` squarefree; returns ``(f, d0)``."""
    if d <= 0:
        raise ValueError("d must be positive")
    f, d0 = 1, 1
    n = d
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            f *= p ** (e // 2)
            if e % 2:
                d0 *= p
        p += 1 if p == 2 else 2
    d0 *= n
    return f, d0


class Surd:
    """``(a + b*sqrt(d))/c`` with ``d`` squarefree >= 2, ``b != 0``, ``c >= 1``.

    Instances are normalized (``gcd(a, b, c) == 1``) and immutable.
    Arithmetic stays inside the field; operations whose result is
    rational collapse to :class:`fractions.Fraction` via :func:`make_surd`.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int, _normalized: bool = False):
        if not _normalized:
            raise TypeError("use make_surd() to construct values")
        self.a, self.b, self.c, self.d = a, b, c, d

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> "Surd":
        return Surd(-self.a, -self.b, self.c, self.d, _normalized=True)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            num = other.numerator
            den = other.denominator
            return make_surd(self.a * den + num * self.c, self.b * den,
                             self.d, self.c * den)
        if isinstance(other, Surd):
            if other.d != self.d:
                return NotImplemented
            return make_surd(self.a * other.c + other.a * self.c,
                             self.b * other.c + other.b * self.c,
                             self.d, self.c * other.c)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        res = self.__add__(-other if isinstance(other, Surd) else -Fraction(other))
        return res

    def __rsub__(self, other):
        return (-self).__add__(Fraction(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return make_surd(self.a * other.numerator, self.b * other.numerator,
                             self.d, self.c * other.denominator)
        if isinstance(other, Surd):
            if other.d != self.d:
                return NotImplemented
            return make_surd(self.a * other.a + self.b * other.b * self.d,
                             self.a * other.b + self.b * other.a,
                             self.d, self.c * other.c)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        # 1/((a+b*sqrt(d))/c) = c*(a-b*sqrt(d)) / (a^2 - b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        return make_surd(self.c * self.a, -self.c * self.b, self.d, norm)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if other == 0:
                raise ZeroDivisionError
            return self * (1 / other)
        if isinstance(other, Surd):
            if other.d != self.d:
                return NotImplemented
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * Fraction(other)

    # -- predicates ----------------------------------------------------

    def sign(self) -> int:
        a, b = self.a, self.b
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        t = a * a - b * b * self.d
        if a > 0:  # b < 0
            return 1 if t > 0 else -1  # t == 0 impossible (sqrt(d) irrational)
        return -1 if t > 0 else 1

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other) -> bool:
        if isinstance(other, Surd):
            return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)
        if isinstance(other, (int, Fraction)):
            return False  # b != 0 makes the value irrational
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        diff = self - other if isinstance(other, (Surd, int, Fraction)) else NotImplemented
        if diff is NotImplemented:
            return NotImplemented
        return ex_sign(diff) < 0

    def __le__(self, other):
        lt = self.__lt__(other)
        if lt is NotImplemented:
            return NotImplemented
        return lt or self == other

    def __gt__(self, other):
        le = self.__le__(other)
        return NotImplemented if le is NotImplemented else not le

    def __ge__(self, other):
        lt = self.__lt__(other)
        return NotImplemented if lt is NotImplemented else not lt

    # -- evaluation ------------------------------------------------------

    def interval(self, prec: int) -> Interval:
        import gmpy2
        from .intervals import _dn, _up

        with _dn(prec):
            r_lo = gmpy2.sqrt(gmpy2.mpfr(self.d))
        with _up(prec):
            r_hi = gmpy2.sqrt(gmpy2.mpfr(self.d))
        root = Interval(r_lo, r_hi)
        val = root.mul_fraction(Fraction(self.b), prec).add(
            Interval.from_fraction(Fraction(self.a), prec), prec)
        return val.mul_fraction(Fraction(1, self.c), prec)

    def conjugate(self) -> "Surd":
        return Surd(self.a, -self.b, self.c, self.d, _normalized=True)

    def __repr__(self) -> str:
        return f"Surd(({self.a}{self.b:+}*sqrt({self.d}))/{self.c})"


ExactReal = Union[Fraction, Surd]


def make_surd(a: int, b: int, d: int, c: int) -> ExactReal:
    """Normalized ``(a + b*sqrt(d))/c``; collapses to Fraction when rational."""
    if c == 0:
        raise ZeroDivisionError("surd denominator is zero")
    f, d0 = squarefree_part(d)
    b *= f
    if d0 == 1:
        return Fraction(a + b, c)
    if b == 0:
        return Fraction(a, c)
    if c < 0:
        a, b, c = -a, -b, -c
    g = math.gcd(math.gcd(abs(a), abs(b)), c)
    return Surd(a // g, b // g, c // g, d0, _normalized=True)


# -- generic helpers over ExactReal -------------------------------------


def ex_sign(x: ExactReal) -> int:
    if isinstance(x, Surd):
        return x.sign()
    return (x > 0) - (x < 0)


def ex_is_zero(x: ExactReal) -> bool:
    return isinstance(x, Fraction) and x == 0


def ex_abs(x: ExactReal) -> ExactReal:
    return abs(x)


def ex_eq(x: ExactReal, y: ExactReal) -> bool:
    """Exact equality, decidable across distinct quadratic fields."""
    if isinstance(x, Surd) and isinstance(y, Surd) and x.d != y.d:
        return False  # distinct squarefree kernels, both irrational
    return x == y


def ex_interval(x: ExactReal, prec: int) -> Interval:
    if isinstance(x, Surd):
        return x.interval(prec)
    return Interval.from_fraction(x, prec)


def ex_floor(x: ExactReal) -> int:
    if isinstance(x, Fraction):
        return math.floor(x)
    prec = 64
    while prec <= _FLOOR_PREC_CAP:
        iv = x.interval(prec)
        import gmpy2

        lo = int(gmpy2.floor(iv.lo))
        hi = int(gmpy2.floor(iv.hi))
        if lo == hi:
            return lo
        prec *= 2
    raise RuntimeError("floor did not stabilize; value suspiciously close to an integer")


def ex_round(x: ExactReal) -> int:
    """Nearest integer, ties (possible only for rationals) round half up."""
    return ex_floor(x + Fraction(1, 2))


def ex_pow(x: ExactReal, n: int) -> ExactReal:
    if n == 0:
        return Fraction(1)
    if n < 0:
        inv = x.inverse() if isinstance(x, Surd) else 1 / x
        return ex_pow(inv, -n)
    result: ExactReal = Fraction(1)
    base = x
    while n:
        if n & 1:
            r = result * base
            result = r
        base = base * base
        n >>= 1
    return result


def monomial_is_one(factors: Iterable[tuple[ExactReal, int]]) -> bool:
    """Decide exactly whether ``prod(base**exponent) == 1``.

    Bases must be nonzero and lie in ``Q`` or real quadratic fields.
    The product of proper surds from distinct squarefree kernels is
    never rational, which keeps the decision elementary.
    """
    rational = Fraction(1)
    per_field: dict[int, ExactReal] = {}
    for base, exponent in factors:
        if ex_is_zero(base):
            raise ValueError("zero base in monomial")
        if exponent == 0:
            continue
        powed = ex_pow(base, exponent)
        if isinstance(powed, Fraction):
            rational *= powed
        else:
            acc = per_field.get(powed.d)
            merged = powed if acc is None else acc * powed
            if isinstance(merged, Fraction):
                rational *= merged
                per_field.pop(powed.d, None)
            else:
                per_field[merged.d] = merged
    if per_field:
        return False
    return rational == 1


def log_combo_is_zero(rational_part: Fraction,
                      log_terms: Iterable[tuple[ExactReal, Fraction]]) -> bool:
    """Decide exactly whether ``rational_part + sum(coeff*log(base)) == 0``.

    Bases are positive algebraic numbers of degree <= 2; by the
    Lindemann-Weierstrass theorem the combination can vanish only when
    the rational part is zero and the matching monomial equals one.
    """
    terms = [(base, coeff) for base, coeff in log_terms if coeff != 0]
    cleaned = []
    for base, coeff in terms:
        if ex_sign(base) <= 0:
            raise ValueError("log base must be positive")
        if isinstance(base, Fraction) and base == 1:
            continue
        cleaned.append((base, coeff))
    if rational_part != 0:
        # sum(coeff*log(base)) would have to equal a nonzero rational,
        # i.e. an algebraic number would equal exp(nonzero rational).
        return False
    if not cleaned:
        return True
    lcm = 1
    for _, coeff in cleaned:
        lcm = lcm * coeff.denominator // math.gcd(lcm, coeff.denominator)
    return monomial_is_one(
        (base, int(coeff * lcm)) for base, coeff in cleaned)
