"""Exact log-affine forms and certified breakpoint locations.

A *form* represents a function of the parameter ``q``::

    value(q) = const + sum(coeff_i * log(base_i)) + slope * q

with ``const``, ``coeff_i``, ``slope`` exact rationals and ``base_i``
positive numbers from :mod:`wapprox.exactnum`.  Every linear piece of a
minima trajectory is such a form (the log of an exact coordinate plus a
rational multiple of ``q``), and so is every derived piecewise-linear
quantity downstream.

Breakpoints of trajectories are roots of nonconstant forms.  They are
usually irrational, so they are kept symbolically (:class:`FormRoot`)
and refined to intervals on demand.  Comparisons between breakpoints
escalate precision and, when enclosures keep overlapping, fall back to
an exact algebraic decision through
:func:`wapprox.exactnum.log_combo_is_zero` -- two breakpoints are never
*silently* merged or split.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import PrecisionExhausted, UndecidableComparison
from .exactnum import ExactReal, ex_eq, ex_interval, ex_sign, log_combo_is_zero
from .intervals import Interval, Ordering, PrecisionPolicy


@lru_cache(maxsize=1 << 18)
def _log_base_iv(base: ExactReal, prec: int) -> Interval:
    iv = ex_interval(base, prec)
    if iv.lo <= 0:
        # exact value is positive; the enclosure is just too loose
        raise UndecidableComparison("log argument enclosure touches zero")
    return iv.log(prec)


def _merge_logs(entries) -> tuple:
    merged: list[tuple[ExactReal, Fraction]] = []
    for base, coeff in entries:
        if coeff == 0:
            continue
        if isinstance(base, Fraction) and base == 1:
            continue
        for i, (b, c) in enumerate(merged):
            if ex_eq(b, base):
                merged[i] = (b, c + coeff)
                break
        else:
            merged.append((base, coeff))
    return tuple((b, c) for b, c in merged if c != 0)


@dataclass(frozen=True)
class AffineLogForm:
    """``const + sum(coeff*log(base)) + slope*q`` with exact coefficients."""

    const: Fraction = Fraction(0)
    logs: tuple = ()
    slope: Fraction = Fraction(0)

    @staticmethod
    def of_log(base: ExactReal, slope: Fraction = Fraction(0)) -> "AffineLogForm":
        """The form ``log(base) + slope*q`` for a positive exact base."""
        if ex_sign(base) <= 0:
            raise ValueError("log base must be positive")
        return AffineLogForm(Fraction(0), _merge_logs([(base, Fraction(1))]), slope)

    @staticmethod
    def constant(value: Fraction) -> "AffineLogForm":
        return AffineLogForm(Fraction(value), (), Fraction(0))

    # -- linear algebra over forms ------------------------------------

    def add(self, other: "AffineLogForm") -> "AffineLogForm":
        return AffineLogForm(self.const + other.const,
                             _merge_logs(list(self.logs) + list(other.logs)),
                             self.slope + other.slope)

    def sub(self, other: "AffineLogForm") -> "AffineLogForm":
        return self.add(other.scale(Fraction(-1)))

    def scale(self, r: Fraction) -> "AffineLogForm":
        if r == 0:
            return AffineLogForm()
        return AffineLogForm(self.const * r,
                             tuple((b, c * r) for b, c in self.logs),
                             self.slope * r)

    def shift(self, r: Fraction) -> "AffineLogForm":
        return AffineLogForm(self.const + r, self.logs, self.slope)

    # -- exact predicates -----------------------------------------------

    def is_identically_zero(self) -> bool:
        return self.slope == 0 and log_combo_is_zero(self.const, self.logs)

    def same_line(self, other: "AffineLogForm") -> bool:
        return self.sub(other).is_identically_zero()

    def intercept_is_zero_at(self, q: Fraction) -> bool:
        """Exact test ``value(q) == 0`` at a rational point."""
        return log_combo_is_zero(self.const + self.slope * q, self.logs)

    # -- evaluation -------------------------------------------------------

    def intercept_interval(self, prec: int) -> Interval:
        """Enclosure of the q-independent part ``const + sum(coeff*log base)``."""
        return _intercept_cached(self, prec)

    def eval_fraction(self, q: Fraction, prec: int) -> Interval:
        iv = self.intercept_interval(prec)
        if self.slope:
            iv = iv.add(Interval.from_fraction(self.slope * q, prec), prec)
        return iv

    def eval_interval(self, q_iv: Interval, prec: int) -> Interval:
        iv = self.intercept_interval(prec)
        if self.slope:
            iv = iv.add(q_iv.mul_fraction(self.slope, prec), prec)
        return iv

    def eval_qpoint(self, point: "QPoint", prec: int) -> Interval:
        if isinstance(point, Fraction):
            return self.eval_fraction(point, prec)
        return self.eval_interval(point.refine(prec), prec)


@lru_cache(maxsize=1 << 18)
def _intercept_cached(form: "AffineLogForm", prec: int) -> Interval:
    acc = Interval.from_fraction(form.const, prec)
    for base, coeff in form.logs:
        acc = acc.add(_log_base_iv(base, prec).mul_fraction(coeff, prec), prec)
    return acc


@dataclass(frozen=True)
class FormRoot:
    """The unique root of a form with nonzero slope."""

    form: AffineLogForm

    def __post_init__(self):
        if self.form.slope == 0:
            raise ValueError("root of a constant form")

    def refine(self, prec: int) -> Interval:
        iv = self.form.intercept_interval(prec)
        return iv.mul_fraction(Fraction(-1) / self.form.slope, prec)


QPoint = Union[Fraction, FormRoot]


def crossing(f: AffineLogForm, g: AffineLogForm) -> FormRoot | None:
    """Intersection point of two non-parallel lines; None when parallel."""
    d = f.sub(g)
    if d.slope == 0:
        return None
    return FormRoot(d)


def qpoint_interval(point: QPoint, prec: int) -> Interval:
    if isinstance(point, Fraction):
        return Interval.from_fraction(point, prec)
    return point.refine(prec)


def form_zero_at(form: AffineLogForm, point: QPoint) -> bool:
    """Exact test of ``form(point) == 0``."""
    if isinstance(point, Fraction):
        return form.intercept_is_zero_at(point)
    # point is the root of r(q) = 0; substitute q = -(n_r)/s_r and clear s_r:
    #   s_r * form(q*) = s_r * n_f - s_f * n_r   (n_* = q-independent parts)
    r = point.form
    combined = AffineLogForm(r.const, r.logs, Fraction(0)).scale(-form.slope).add(
        AffineLogForm(form.const, form.logs, Fraction(0)).scale(r.slope))
    return log_combo_is_zero(combined.const, combined.logs)


def qpoints_equal(x: QPoint, y: QPoint) -> bool:
    """Exact equality of two breakpoint locations."""
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x == y
    if isinstance(x, Fraction):
        return form_zero_at(y.form, x)
    if isinstance(y, Fraction):
        return form_zero_at(x.form, y)
    return form_zero_at(y.form, x)


def compare_qpoints(x: QPoint, y: QPoint, policy: PrecisionPolicy) -> Ordering:
    """Certified total-order comparison of breakpoints (never UNDECIDABLE)."""
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        if x == y:
            return Ordering.EQUAL
        return Ordering.LESS if x < y else Ordering.GREATER
    equal_checked = False
    for prec in policy.ladder():
        try:
            xi = qpoint_interval(x, prec)
            yi = qpoint_interval(y, prec)
        except UndecidableComparison:
            continue
        if xi.hi < yi.lo:
            return Ordering.LESS
        if xi.lo > yi.hi:
            return Ordering.GREATER
        if not equal_checked:
            if qpoints_equal(x, y):
                return Ordering.EQUAL
            equal_checked = True
    raise PrecisionExhausted(
        f"breakpoints separated by less than 2^-{policy.max_bits}")


def form_sign_at(form: AffineLogForm, point: QPoint, policy: PrecisionPolicy) -> int:
    """Certified sign of ``form(point)``: -1, 0, or +1."""
    zero_checked = False
    for prec in policy.ladder():
        try:
            iv = form.eval_qpoint(point, prec)
        except UndecidableComparison:
            continue
        if iv.hi < 0:
            return -1
        if iv.lo > 0:
            return 1
        if not zero_checked:
            if form_zero_at(form, point):
                return 0
            zero_checked = True
    raise PrecisionExhausted(
        f"form value at breakpoint within 2^-{policy.max_bits} of zero")


def compare_values(f: AffineLogForm, g: AffineLogForm, point: QPoint,
                   policy: PrecisionPolicy) -> Ordering:
    """Certified comparison of two form values at the same location."""
    s = form_sign_at(f.sub(g), point, policy)
    return (Ordering.LESS, Ordering.EQUAL, Ordering.GREATER)[s + 1]


def sign_at_once(form: AffineLogForm, point: QPoint, prec: int) -> int:
    """Single-rung certified sign; raises UndecidableComparison on overlap.

    Exact ties are recognized algebraically before giving up, so a raise
    always means "genuinely separated but below 2^-prec", never a tie.
    """
    iv = form.eval_qpoint(point, prec)
    if iv.hi < 0:
        return -1
    if iv.lo > 0:
        return 1
    if form_zero_at(form, point):
        return 0
    raise UndecidableComparison(f"sign of form at point unresolved at {prec} bits")


def refine_qpoint(point: QPoint, policy: PrecisionPolicy,
                  width_bits: int) -> Interval:
    """Enclosure of a breakpoint with width below ``2**-width_bits``."""
    from gmpy2 import mpq

    bound = mpq(1, 1 << width_bits)
    for prec in policy.ladder():
        if prec < width_bits:
            continue
        try:
            iv = qpoint_interval(point, prec)
        except UndecidableComparison:
            continue
        if iv.is_point() or iv.width < bound:
            return iv
    raise PrecisionExhausted("could not refine breakpoint to requested width")
