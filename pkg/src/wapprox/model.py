"""Problem model: targets, weights, the lattice map and its guards.

A target number is given by a closed spec grammar (exact rationals,
quadratic surds, lacunary series truncated to exact rationals).  The
constructor reduces every target modulo one, so stored values lie in
(0, 1) and all downstream arithmetic is exact on the stored value.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import ConfigError, DependentTargets, ZeroVector
from .exactnum import ExactReal, Surd, ex_floor, ex_interval, ex_round, make_surd
from .intervals import Interval, PrecisionPolicy


@dataclass(frozen=True)
class Weights:
    """Exponent pair ``(nu1, nu2)`` with ``0 < nu1 <= nu2`` and ``nu1 + nu2 == 1``."""

    nu1: Fraction
    nu2: Fraction

    def __post_init__(self):
        if not (0 < self.nu1 <= self.nu2):
            raise ConfigError("weights must satisfy 0 < nu1 <= nu2")
        if self.nu1 + self.nu2 != 1:
            raise ConfigError("weights must satisfy nu1 + nu2 == 1")

    @property
    def slopes(self) -> tuple[Fraction, Fraction, Fraction]:
        """The slope alphabet of every trajectory line: (-1, nu1, nu2)."""
        return (Fraction(-1), self.nu1, self.nu2)


_RATIONAL_RE = re.compile(r"^rational\((-?\d+),(-?\d+)\)$")
_SURD_RE = re.compile(r"^surd\((-?\d+),(-?\d+),(\d+),(-?\d+)\)$")
_SERIES_RE = re.compile(r"^series\(base=(\d+),rule=(factorial|power3),terms=(\d+)\)$")


def _series_exponent(rule: str, k: int) -> int:
    return math.factorial(k) if rule == "factorial" else 3 ** k


@dataclass(frozen=True)
class NumberSpec:
    """A parsed target spec plus its exact value reduced modulo one."""

    text: str
    value: ExactReal = field(compare=False)

    @staticmethod
    def parse(text: str) -> "NumberSpec":
        m = _RATIONAL_RE.match(text)
        if m:
            p, q = int(m.group(1)), int(m.group(2))
            if q == 0:
                raise ConfigError(f"zero denominator in {text!r}")
            raw: ExactReal = Fraction(p, q)
        else:
            m = _SURD_RE.match(text)
            if m:
                a, b, d, c = map(int, m.groups())
                if c == 0:
                    raise ConfigError(f"zero denominator in {text!r}")
                if d == 0:
                    raise ConfigError(f"surd kernel must be positive in {text!r}")
                raw = make_surd(a, b, d, c)
            else:
                m = _SERIES_RE.match(text)
                if m is None:
                    raise ConfigError(f"unrecognized number spec {text!r}")
                base, rule, terms = int(m.group(1)), m.group(2), int(m.group(3))
                if base < 2:
                    raise ConfigError(f"series base must be >= 2 in {text!r}")
                if terms < 1:
                    raise ConfigError(f"series needs at least one term in {text!r}")
                raw = Fraction(sum(
                    Fraction(1, base ** _series_exponent(rule, k))
                    for k in range(1, terms + 1)))
        reduced = raw - ex_floor(raw)
        if isinstance(reduced, Fraction) and reduced == 0:
            raise ConfigError(f"{text!r} reduces to an integer; target must lie in (0,1)")
        return NumberSpec(text=text, value=reduced)

    @property
    def series_params(self) -> Optional[tuple[int, str, int]]:
        m = _SERIES_RE.match(self.text)
        if m is None:
            return None
        return int(m.group(1)), m.group(2), int(m.group(3))


@dataclass(frozen=True)
class TargetPair:
    xi1: NumberSpec
    xi2: NumberSpec


class IntVec(NamedTuple):
    """Integer vector ``(x, y1, y2)`` mapped to the lattice point
    ``(x, xi1*x - y1, xi2*x - y2)``."""

    x: int
    y1: int
    y2: int

    def is_zero(self) -> bool:
        return self == (0, 0, 0)

    def neg(self) -> "IntVec":
        return IntVec(-self.x, -self.y1, -self.y2)

    def canonical(self) -> "IntVec":
        """Representative of {v, -v} with positive leading entry."""
        for comp in self:
            if comp > 0:
                return self
            if comp < 0:
                return self.neg()
        return self

    def primitive(self) -> "IntVec":
        g = math.gcd(math.gcd(abs(self.x), abs(self.y1)), abs(self.y2))
        return self if g in (0, 1) else IntVec(self.x // g, self.y1 // g, self.y2 // g)

    def lex_key(self) -> tuple[int, int, int, int]:
        return (abs(self.x), self.x, self.y1, self.y2)


@dataclass(frozen=True)
class DependenceResult:
    independent: bool
    witness: Optional[tuple[int, int, int]]
    height_bound: int


def _decompose(value: ExactReal) -> tuple[Fraction, Fraction, Optional[int]]:
    """Write ``value = rat + coeff*sqrt(d)``; ``d`` is None for rationals."""
    if isinstance(value, Surd):
        return Fraction(value.a, value.c), Fraction(value.b, value.c), value.d
    return Fraction(value), Fraction(0), None


@dataclass(frozen=True)
class ProblemInstance:
    """An approximation problem: two targets, weights, precision policy."""

    targets: TargetPair
    weights: Weights
    policy: PrecisionPolicy = PrecisionPolicy()

    def __post_init__(self):
        for spec in (self.targets.xi1, self.targets.xi2):
            params = spec.series_params
            if params is None:
                continue
            base, rule, terms = params
            # the omitted tail must stay below 2^-(max_bits+8) so that the
            # truncated rational can stand in for the full series at every
            # precision the policy may reach
            s_next = _series_exponent(rule, terms + 1)
            if base ** s_next < 2 ** (self.policy.max_bits + 9):
                raise ConfigError(
                    f"{spec.text!r}: series tail exceeds 2^-(max_bits+8); "
                    f"increase terms or lower max_bits={self.policy.max_bits}")

    @property
    def xi1(self) -> ExactReal:
        return self.targets.xi1.value

    @property
    def xi2(self) -> ExactReal:
        return self.targets.xi2.value

    def rounded_targets(self) -> tuple[int, int]:
        return ex_round(self.xi1), ex_round(self.xi2)

    def faithful_q_bound(self) -> Optional[Fraction]:
        """For series targets: largest q the truncation provably represents.

        Beyond roughly ``(s_(N+1)*ln(base) - ln 4)/2`` the omitted tail
        could move trajectory breakpoints; None when no series target.
        """
        bounds = []
        for spec in (self.targets.xi1, self.targets.xi2):
            params = spec.series_params
            if params is None:
                continue
            base, rule, terms = params
            s_next = _series_exponent(rule, terms + 1)
            # ln(base^s_next / 4) / 2, rounded down via bit lengths
            bits = s_next * math.log2(base) - 2
            bounds.append(Fraction(int(bits * 0.3465 * 2)) / 2)
        return min(bounds) if bounds else None


def lattice_point(inst: ProblemInstance, v: IntVec) -> tuple[Interval, Interval, Interval]:
    """Enclosures of ``(x, xi1*x - y1, xi2*x - y2)`` at the instance precision."""
    if v.is_zero():
        raise ZeroVector("lattice point of the zero vector")
    prec = inst.policy.start_bits
    c0, c1, c2 = coordinates_exact(inst, v)
    return (Interval.from_fraction(Fraction(c0), prec),
            ex_interval(c1, prec), ex_interval(c2, prec))


def coordinates_exact(inst: ProblemInstance, v: IntVec) -> tuple[int, ExactReal, ExactReal]:
    """Signed exact coordinates of the lattice image of ``v``."""
    c1 = inst.xi1 * v.x - v.y1
    c2 = inst.xi2 * v.x - v.y2
    return v.x, c1, c2


def dependence_check(inst: ProblemInstance, height_bound: int) -> DependenceResult:
    """Search for ``a + b*xi1 + c*xi2 == 0`` with coefficients up to the bound.

    Exact relations are provable for rational targets and surds sharing a
    field; a miss is only "independent up to this height", never a proof.
    """
    if height_bound < 1:
        raise ConfigError("height_bound must be >= 1")
    h = height_bound
    r1, s1, d1 = _decompose(inst.xi1)
    r2, s2, d2 = _decompose(inst.xi2)

    def check(b: int, c: int) -> Optional[tuple[int, int, int]]:
        if b == 0 and c == 0:
            return None
        w = b * r1 + c * r2
        if w.denominator == 1 and abs(w) <= h:
            return (-int(w), b, c)
        return None

    candidates: list[tuple[int, int]] = []
    if d1 is not None and d2 is not None:
        if d1 == d2:
            # b*s1 + c*s2 == 0 along a primitive direction
            num1, num2 = s1.numerator * s2.denominator, s2.numerator * s1.denominator
            g = math.gcd(abs(num1), abs(num2))
            db, dc = num2 // g, -num1 // g
            t = 1
            while abs(t * db) <= h and abs(t * dc) <= h:
                candidates.append((t * db, t * dc))
                candidates.append((-t * db, -t * dc))
                t += 1
        # distinct fields: no nontrivial relation can kill both surd parts
    elif d1 is None and d2 is None:
        candidates = [(b, c) for b in range(-h, h + 1) for c in range(-h, h + 1)]
    elif d1 is None:
        candidates = [(b, 0) for b in range(-h, h + 1)]
    else:
        candidates = [(0, c) for c in range(-h, h + 1)]

    for b, c in candidates:
        witness = check(b, c)
        if witness is not None:
            return DependenceResult(False, witness, height_bound)
    return DependenceResult(True, None, height_bound)


def require_independent(inst: ProblemInstance, height_bound: int = 50) -> None:
    result = dependence_check(inst, height_bound)
    if not result.independent:
        raise DependentTargets(
            f"targets rationally dependent: witness {result.witness}",
            witness=result.witness)


def make_instance(xi1: str, xi2: str, nu1: Fraction, nu2: Fraction,
                  policy: PrecisionPolicy | None = None) -> ProblemInstance:
    """Convenience constructor from spec strings and weight fractions."""
    return ProblemInstance(
        targets=TargetPair(NumberSpec.parse(xi1), NumberSpec.parse(xi2)),
        weights=Weights(Fraction(nu1), Fraction(nu2)),
        policy=policy or PrecisionPolicy())
