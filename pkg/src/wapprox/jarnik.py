"""Transfer functions, interval-pair residuals, and the two-sided bound.

The localized relation at each between-interval stretch reads

    (2 - nu_j) psi1(a*_j) + (1 + nu_j) psi3(b_j) = -3 psi1(a*_j) psi3(b_j) + O(1/b_j)

with an effective weight ``nu_j`` in [nu1, nu2] determined by how the
third-minimum slope splits the stretch.  Solving it either way gives the
rational transfer functions ``f_nu`` and ``g_nu``; combined with the
localized limit estimates they yield the two-sided inequality between
the first upper and third lower approximation constants, which at equal
weights collapses to the classical identity
``phi1 + phi3 + 2 phi1 phi3 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .analysis import (LOG6, NormalizedTriple, PhiEstimates, StructureAnnotation,
                       _form_at, _psi_at_point)
from .errors import PoleInput, PrecisionExhausted
from .forms import QPoint, qpoint_interval
from .intervals import Interval, PrecisionPolicy

Number = Union[Fraction, Interval]


def _as_interval(x: Number, prec: int) -> Interval:
    return x if isinstance(x, Interval) else Interval.from_fraction(Fraction(x), prec)


def f_nu(nu: Fraction, x: Number, prec: int = 192) -> Number:
    """``(1+nu) x / (3x + 2 - nu)``; increasing for ``x > (nu-2)/3``."""
    nu = Fraction(nu)
    pole = (nu - 2) / 3
    if isinstance(x, Fraction) or isinstance(x, int):
        x = Fraction(x)
        if x <= pole:
            raise PoleInput(f"f_nu needs x > {pole}")
        return (1 + nu) * x / (3 * x + 2 - nu)
    if not x.lo > _as_interval(pole, prec).hi:
        raise PoleInput("f_nu argument enclosure reaches the pole")
    num = x.mul_fraction(1 + nu, prec)
    den = x.mul_fraction(Fraction(3), prec).add(
        Interval.from_fraction(2 - nu, prec), prec)
    return num.div(den, prec)


def g_nu(nu: Fraction, x: Number, prec: int = 192) -> Number:
    """``(2-nu) x / (3x + 1 + nu)``; increasing for ``x > -(1+nu)/3``."""
    nu = Fraction(nu)
    pole = -(1 + nu) / 3
    if isinstance(x, Fraction) or isinstance(x, int):
        x = Fraction(x)
        if x <= pole:
            raise PoleInput(f"g_nu needs x > {pole}")
        return (2 - nu) * x / (3 * x + 1 + nu)
    if not x.lo > _as_interval(pole, prec).hi:
        raise PoleInput("g_nu argument enclosure reaches the pole")
    num = x.mul_fraction(2 - nu, prec)
    den = x.mul_fraction(Fraction(3), prec).add(
        Interval.from_fraction(1 + nu, prec), prec)
    return num.div(den, prec)


@dataclass(frozen=True)
class TransferParams:
    """Effective weight of one stretch; must lie between the two weights."""

    nu: Fraction

    def validate(self, nu1: Fraction, nu2: Fraction) -> None:
        if not nu1 <= self.nu <= nu2:
            raise ValueError(f"nu={self.nu} outside [{nu1}, {nu2}]")


@dataclass
class ResidualRecord:
    index: int
    b: QPoint
    b_value: Interval
    residual: Interval
    nu_effective: Interval
    #: True when no clean single slope switch existed and the effective
    #: weight came from the slope average over the stretch
    averaged: bool


def residual_36(triple: NormalizedTriple, annotation: StructureAnnotation,
                policy: Optional[PrecisionPolicy] = None) -> list[ResidualRecord]:
    """Residual of the localized relation at every detected (b_j, a*_j) pair.

    The effective weight is the length-weighted average of the third
    minimum's slope over the stretch, which equals the switch-point
    formula whenever a clean switch exists; records are flagged when the
    average had to stand in.  The quantity ``residual * b_j`` should stay
    bounded (constants depend only on the threshold c).
    """
    policy = policy or triple.policy
    prec = policy.start_bits
    nu1, nu2 = triple.weights
    out: list[ResidualRecord] = []
    for k, ((ti, bi), switch) in enumerate(
            zip(annotation.interval_pairs, annotation.switch_points)):
        b = annotation.top_intervals[ti][1]
        a_star = annotation.bottom_intervals[bi][0]
        b_iv = qpoint_interval(b, prec)
        a_iv = qpoint_interval(a_star, prec)
        length = a_iv.sub(b_iv, prec)
        if not length.lo > 0:
            continue
        if nu1 == nu2:
            nu_iv = Interval.from_fraction(nu1, prec)
            averaged = False
        else:
            # gain of the third component across the stretch, over length
            f3_b = _form_at(triple, b, 2, policy)
            f3_a = _form_at(triple, a_star, 2, policy)
            gain = _third_gain(triple, b, a_star, policy, prec)
            nu_iv = gain.div(length, prec)
            lo = max(nu_iv.lo, Interval.from_fraction(nu1, prec).lo)
            hi = min(nu_iv.hi, Interval.from_fraction(nu2, prec).hi)
            if lo > hi:
                lo, hi = hi, lo
            nu_iv = Interval(lo, hi)
            averaged = switch is None
        psi1 = _psi_at_point(triple, _form_at(triple, a_star, 0, policy),
                             a_star, prec)
        psi3 = _psi_at_point(triple, _form_at(triple, b, 2, policy), b, prec)
        two_minus = Interval.from_fraction(Fraction(2), prec).sub(nu_iv, prec)
        one_plus = Interval.from_fraction(Fraction(1), prec).add(nu_iv, prec)
        residual = two_minus.mul(psi1, prec).add(
            one_plus.mul(psi3, prec), prec).add(
            psi1.mul(psi3, prec).mul_fraction(Fraction(3), prec), prec)
        out.append(ResidualRecord(index=k, b=b, b_value=b_iv,
                                  residual=residual, nu_effective=nu_iv,
                                  averaged=averaged))
    return out


def _third_gain(triple, b: QPoint, a_star: QPoint, policy, prec) -> Interval:
    """Telescoped slope-weighted gain of the raw third minimum on [b, a*]."""
    from .forms import compare_qpoints
    from .intervals import Ordering

    total = Interval.point(0)
    prev = b
    for seg in triple.segments:
        if compare_qpoints(seg.q_end, b, policy) != Ordering.GREATER:
            continue
        if compare_qpoints(seg.q_start, a_star, policy) != Ordering.LESS:
            break
        start = prev
        end = seg.q_end
        if compare_qpoints(end, a_star, policy) == Ordering.GREATER:
            end = a_star
        length = qpoint_interval(end, prec).sub(qpoint_interval(start, prec), prec)
        total = total.add(length.mul_fraction(seg.switch_slopes[2], prec), prec)
        prev = end
    return total


@dataclass
class JarnikReport:
    hypothesis_ok: bool
    hypothesis_strict: bool
    lhs: Interval
    mid: Interval
    rhs: Interval
    tol: Interval
    verdict: str  # "pass" | "fail" | "inapplicable"
    residuals_36: list[ResidualRecord]
    classical_identity_residual: Optional[Interval]
    phi1_upper: Interval
    phi3_lower: Interval
    phi3_upper: Interval
    weights: tuple[Fraction, Fraction]
    window: tuple[Fraction, Fraction]
    prec: int = 192


def check_theorem(triple: NormalizedTriple, annotation: StructureAnnotation,
                  estimates: PhiEstimates,
                  policy: Optional[PrecisionPolicy] = None) -> JarnikReport:
    """Evaluate the two-sided inequality on the window estimates.

    Verdict "pass" means both bounds hold within ``tol = 3*log(6)/q_lo``;
    "inapplicable" means the finite-window hypothesis (third upper
    constant below nu1) failed with distinct weights.  At equal weights
    the hypothesis is not required and the classical identity residual
    is reported as well.
    """
    policy = policy or triple.policy
    prec = policy.start_bits
    nu1, nu2 = triple.weights
    q_lo = estimates.window[0]
    if q_lo <= 0:
        raise PrecisionExhausted("window must start at positive q")
    K = LOG6.eval_fraction(Fraction(1), prec)
    tol = K.mul_fraction(Fraction(3) / q_lo, prec)

    phi1_up = estimates.phi_upper[0]
    phi3_lo = estimates.phi_lower[2]
    phi3_up = estimates.phi_upper[2]

    hyp_gap = Interval.from_fraction(nu1, prec).sub(phi3_up, prec)
    hypothesis_ok = hyp_gap.lo > 0
    strict_gap = hyp_gap.sub(K.mul_fraction(Fraction(1) / q_lo, prec), prec)
    hypothesis_strict = strict_gap.lo > 0

    lhs = phi1_up.mul_fraction(2 - nu1, prec).add(
        phi3_lo.mul_fraction(1 + nu1, prec), prec)
    mid = phi1_up.mul(phi3_lo, prec).mul_fraction(Fraction(-3), prec)
    rhs = phi1_up.mul_fraction(2 - nu2, prec).add(
        phi3_lo.mul_fraction(1 + nu2, prec), prec)

    residuals = residual_36(triple, annotation, policy)

    applicable = hypothesis_ok or nu1 == nu2
    if not applicable:
        verdict = "inapplicable"
    else:
        left_ok = not lhs.sub(mid.add(tol, prec), prec).lo > 0
        right_ok = not mid.sub(rhs.add(tol, prec), prec).lo > 0
        verdict = "pass" if (left_ok and right_ok) else "fail"

    classical = None
    if nu1 == nu2:
        classical = phi1_up.add(phi3_lo, prec).add(
            phi1_up.mul(phi3_lo, prec).mul_fraction(Fraction(2), prec), prec)

    return JarnikReport(
        hypothesis_ok=hypothesis_ok, hypothesis_strict=hypothesis_strict,
        lhs=lhs, mid=mid, rhs=rhs, tol=tol, verdict=verdict,
        residuals_36=residuals, classical_identity_residual=classical,
        phi1_upper=phi1_up, phi3_lower=phi3_lo, phi3_upper=phi3_up,
        weights=(nu1, nu2), window=estimates.window, prec=prec)


def symmetric_form(report: JarnikReport) -> tuple[Interval, Interval]:
    """The rewritten bounds ``(1+nu2) phi1 + (1+nu1) phi3`` and its mirror.

    Because ``nu1 + nu2 == 1`` exactly, ``2 - nu1 == 1 + nu2`` as
    rationals and the recomputation reproduces the original bounds bit
    for bit; this is asserted.
    """
    nu1, nu2 = report.weights
    prec = report.prec
    lhs2 = report.phi1_upper.mul_fraction(1 + nu2, prec).add(
        report.phi3_lower.mul_fraction(1 + nu1, prec), prec)
    rhs2 = report.phi1_upper.mul_fraction(1 + nu1, prec).add(
        report.phi3_lower.mul_fraction(1 + nu2, prec), prec)
    assert lhs2.lo == report.lhs.lo and lhs2.hi == report.lhs.hi
    assert rhs2.lo == report.rhs.lo and rhs2.hi == report.rhs.hi
    return lhs2, rhs2
