"""Certified interval arithmetic on MPFR endpoints.

Every real quantity the engine manipulates is enclosed in an
:class:`Interval` whose endpoints are MPFR floats rounded outward
(lower endpoint toward -inf, upper endpoint toward +inf).  A comparison
between two intervals is therefore either provably correct or reported
as undecidable at the current working precision; callers escalate
precision through a :class:`PrecisionPolicy` until the comparison
resolves or the policy is exhausted.

The module is self-contained: it knows nothing about lattices or
number specs, only about enclosures of reals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, TypeVar

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import PrecisionExhausted, UndecidableComparison

#: Extra bits carried by every evaluation on top of the requested
#: precision; absorbs rounding in bounded-depth max/log/exp chains.
GUARD_BITS = 8

T = TypeVar("T")


def _dn(prec: int):
    return gmpy2.context(precision=prec + GUARD_BITS, round=gmpy2.RoundDown)


def _up(prec: int):
    return gmpy2.context(precision=prec + GUARD_BITS, round=gmpy2.RoundUp)


class Ordering(enum.Enum):
    """Outcome of a certified comparison."""

    LESS = -1
    EQUAL = 0
    GREATER = 1
    UNDECIDABLE = 2


@dataclass(frozen=True)
class Interval:
    """A closed enclosure ``[lo, hi]`` of a real number.

    Invariant: ``lo <= hi``.  Endpoints are dyadic (MPFR) values, so
    equality of point intervals is exact.
    """

    lo: "mpfr"
    hi: "mpfr"

    def __post_init__(self):
        if not self.lo <= self.hi:  # also catches NaN endpoints
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    # -- constructors ------------------------------------------------

    @staticmethod
    def point(value: int | mpfr) -> "Interval":
        v = mpfr(value, max(value.bit_length() + 1, 2)) if isinstance(value, int) else value
        return Interval(v, v)

    @staticmethod
    def from_fraction(value: Fraction | int, prec: int) -> "Interval":
        if isinstance(value, int):
            return Interval.point(value)
        q = mpq(value.numerator, value.denominator)
        with _dn(prec):
            lo = mpfr(q)
        with _up(prec):
            hi = mpfr(q)
        return Interval(lo, hi)

    @staticmethod
    def log_of_fraction(value: Fraction, prec: int) -> "Interval":
        """Enclosure of ``log(value)`` for exact rational ``value > 0``."""
        if value <= 0:
            raise ValueError("log of non-positive rational")
        q = mpq(value.numerator, value.denominator)
        with _dn(prec):
            lo = gmpy2.log(mpfr(q))
            # mpfr(q) itself rounds down; log is monotone, so this is a
            # valid lower bound only if the argument rounding goes the
            # same way -- it does (down/down).
        with _up(prec):
            hi = gmpy2.log(mpfr(q))
        return Interval(lo, hi)

    @staticmethod
    def hull(*ivs: "Interval") -> "Interval":
        return Interval(min(i.lo for i in ivs), max(i.hi for i in ivs))

    # -- queries -----------------------------------------------------

    @property
    def width(self) -> mpfr:
        with _up(max(self.lo.precision, self.hi.precision)):
            return self.hi - self.lo

    def midpoint_fraction(self) -> Fraction:
        """Exact midpoint as a dyadic rational."""
        lo = _mpfr_to_fraction(self.lo)
        hi = _mpfr_to_fraction(self.hi)
        return (lo + hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def __contains__(self, value) -> bool:
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        return self.lo <= value <= self.hi

    # -- arithmetic (explicit working precision) ----------------------

    def neg(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def add(self, other: "Interval", prec: int) -> "Interval":
        with _dn(prec):
            lo = self.lo + other.lo
        with _up(prec):
            hi = self.hi + other.hi
        return Interval(lo, hi)

    def sub(self, other: "Interval", prec: int) -> "Interval":
        with _dn(prec):
            lo = self.lo - other.hi
        with _up(prec):
            hi = self.hi - other.lo
        return Interval(lo, hi)

    def mul(self, other: "Interval", prec: int) -> "Interval":
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        with _dn(prec):
            lo = min(a * c, a * d, b * c, b * d)
        with _up(prec):
            hi = max(a * c, a * d, b * c, b * d)
        return Interval(lo, hi)

    def mul_fraction(self, r: Fraction, prec: int) -> "Interval":
        if r == 0:
            return Interval.point(0)
        q = mpq(r.numerator, r.denominator)
        if r > 0:
            with _dn(prec):
                lo = self.lo * q
            with _up(prec):
                hi = self.hi * q
        else:
            with _dn(prec):
                lo = self.hi * q
            with _up(prec):
                hi = self.lo * q
        return Interval(lo, hi)

    def div(self, other: "Interval", prec: int) -> "Interval":
        """Division by a sign-definite interval."""
        if other.contains_zero():
            raise ZeroDivisionError("division by interval containing zero")
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        with _dn(prec):
            lo = min(a / c, a / d, b / c, b / d)
        with _up(prec):
            hi = max(a / c, a / d, b / c, b / d)
        return Interval(lo, hi)

    def log(self, prec: int) -> "Interval":
        if self.lo <= 0:
            raise ValueError("log of interval touching zero")
        with _dn(prec):
            lo = gmpy2.log(self.lo)
        with _up(prec):
            hi = gmpy2.log(self.hi)
        return Interval(lo, hi)

    def exp(self, prec: int) -> "Interval":
        with _dn(prec):
            lo = gmpy2.exp(self.lo)
        with _up(prec):
            hi = gmpy2.exp(self.hi)
        return Interval(lo, hi)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"


def _mpfr_to_fraction(x: mpfr) -> Fraction:
    num, exp = x.as_mantissa_exp()
    num = int(num)
    exp = int(exp)
    if exp >= 0:
        return Fraction(num * (1 << exp))
    return Fraction(num, 1 << (-exp))


def mpfr_to_fraction(x: mpfr) -> Fraction:
    """Exact rational value of a (finite) MPFR number."""
    return _mpfr_to_fraction(x)


def compare(a: Interval, b: Interval) -> Ordering:
    """Certified comparison of two interval enclosures.

    Returns LESS/GREATER only when the intervals are disjoint, EQUAL
    only when both are the same point interval, and UNDECIDABLE
    otherwise.  UNDECIDABLE is a value, not an error: callers decide
    whether to escalate.
    """
    if a.hi < b.lo:
        return Ordering.LESS
    if a.lo > b.hi:
        return Ordering.GREATER
    if a.is_point() and b.is_point() and a.lo == b.lo:
        return Ordering.EQUAL
    return Ordering.UNDECIDABLE


@dataclass(frozen=True)
class PrecisionPolicy:
    """Geometric escalation schedule for working precision (in bits)."""

    start_bits: int = 192
    max_bits: int = 4096
    escalation_factor: Fraction = Fraction(2)

    def __post_init__(self):
        if self.start_bits <= 0 or self.max_bits < self.start_bits:
            raise ValueError("require 0 < start_bits <= max_bits")
        if self.escalation_factor <= 1:
            raise ValueError("escalation_factor must exceed 1")

    def ladder(self) -> Iterator[int]:
        """Yield the precision rungs, ending exactly at ``max_bits``."""
        bits = Fraction(self.start_bits)
        while True:
            rounded = int(bits)
            if rounded >= self.max_bits:
                yield self.max_bits
                return
            yield rounded
            bits *= self.escalation_factor


DEFAULT_POLICY = PrecisionPolicy()


def with_escalation(policy: PrecisionPolicy, computation: Callable[[int], T]) -> T:
    """Rerun ``computation(prec)`` at increasing precision until it succeeds.

    The computation must be deterministic given the precision and raise
    :class:`UndecidableComparison` when an interval comparison cannot be
    resolved at the current rung.
    """
    for prec in policy.ladder():
        try:
            return computation(prec)
        except UndecidableComparison:
            continue
    raise PrecisionExhausted(
        f"comparison undecidable at max_bits={policy.max_bits}; raise max_bits "
        "or shrink the q-range"
    )
