"""Exact successive minima of the parametric lattice problem at one q.

Every nonzero integer vector ``v`` has a max-of-lines function::

    L_v(q) = max(log|x| - q, log|xi1*x - y1| + nu1*q, log|xi2*x - y2| + nu2*q)

with exact coefficients, so the three minima ``L1 <= L2 <= L3`` at a
rational ``q`` are computed exactly: a candidate pool that provably
contains witnesses of all three minima is enumerated, sorted with
certified comparisons, and filtered greedily by linear independence.

Enumeration strategy.  The scaled lattice is LLL-reduced (floating
point only chooses the unimodular transform; correctness never depends
on it).  With ``v1`` the shortest reduced row, every other vector is
``m*v1 + a*u2 + b*u3``; for fixed class ``(a, b)`` the map
``m -> lambda`` is a convex piecewise-linear function whose integer
minimizers lie near explicitly computable balance points.  This keeps
the pool small even when ``lambda3/lambda1`` is astronomically large
(singular targets near their approximation spikes), where a naive
"enumerate the lambda3 box" would have to list ``lambda3/lambda1``
multiples of ``v1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

import gmpy2

from .errors import (DependentTargets, OutOfRange, PrecisionExhausted,
                     UndecidableComparison, WapproxError, ZeroVector)
from .exactnum import ExactReal, ex_abs, ex_floor, ex_interval, ex_is_zero, ex_sign
from .forms import AffineLogForm, FormRoot, crossing, sign_at_once
from .intervals import Interval, Ordering, PrecisionPolicy, mpfr_to_fraction
from .model import IntVec, ProblemInstance, coordinates_exact

_ENUM_CAP = 200_000
_CLASS_CAP = 60_000


class PoolTooLarge(WapproxError):
    """Enumeration bounds exceed the sanity cap (shrink the window)."""


@dataclass(frozen=True)
class MinimaAtQ:
    """The three minima at one parameter, with witnesses and exact lines."""

    q: Fraction
    L: tuple[Interval, Interval, Interval]
    witnesses: tuple[IntVec, IntVec, IntVec]
    forms: tuple[AffineLogForm, AffineLogForm, AffineLogForm]

    def witness_matrix_det(self) -> int:
        (a, b, c) = self.witnesses
        return (a.x * (b.y1 * c.y2 - b.y2 * c.y1)
                - a.y1 * (b.x * c.y2 - b.y2 * c.x)
                + a.y2 * (b.x * c.y1 - b.y1 * c.x))


# -- per-vector term lines ------------------------------------------------


@lru_cache(maxsize=65536)
def _vector_terms_cached(inst: ProblemInstance, v: IntVec):
    x, c1, c2 = coordinates_exact(inst, v)
    nu1, nu2 = inst.weights.nu1, inst.weights.nu2
    terms: list[AffineLogForm] = []
    if x != 0:
        terms.append(AffineLogForm.of_log(Fraction(abs(x)), Fraction(-1)))
    zeros = 0
    for coord, slope in ((c1, nu1), (c2, nu2)):
        if ex_is_zero(coord):
            zeros += 1
            continue
        terms.append(AffineLogForm.of_log(ex_abs(coord), slope))
    if x != 0 and zeros == 2:
        raise DependentTargets(
            f"lattice vector {tuple(v)} has both approximation coordinates "
            "exactly zero; its minima line decreases forever")
    if not terms:
        raise ZeroVector("term lines of the zero vector")
    # drop duplicated lines (possible when nu1 == nu2 and the two
    # coordinates happen to coincide in absolute value)
    unique: list[AffineLogForm] = []
    for t in terms:
        if not any(t.slope == u.slope and t.same_line(u) for u in unique):
            unique.append(t)
    return tuple(unique)


def vector_terms(inst: ProblemInstance, v: IntVec) -> tuple[AffineLogForm, ...]:
    """The distinct lines whose max is ``L_v``; drops exact-zero coordinates."""
    if v.is_zero():
        raise ZeroVector("L of the zero vector")
    return _vector_terms_cached(inst, v)


def eval_L_x(inst: ProblemInstance, v: IntVec, q: Fraction,
             prec: Optional[int] = None) -> Interval:
    """Certified enclosure of ``L_v(q)`` at exact rational ``q >= 0``."""
    q = Fraction(q)
    if q < 0:
        raise OutOfRange("q must be nonnegative")
    prec = prec if prec is not None else inst.policy.start_bits
    terms = vector_terms(inst, v)
    for attempt in inst.policy.ladder():
        if attempt < prec:
            continue
        try:
            ivs = [t.eval_fraction(q, attempt) for t in terms]
        except UndecidableComparison:
            continue
        return Interval(max(i.lo for i in ivs), max(i.hi for i in ivs))
    raise PrecisionExhausted("could not evaluate L_v at policy precision")


def _L_interval(terms, q: Fraction, prec: int) -> Interval:
    ivs = [t.eval_fraction(q, prec) for t in terms]
    return Interval(max(i.lo for i in ivs), max(i.hi for i in ivs))


# -- float LLL (transform selection only) ---------------------------------


def _mpfr_scaled_rows(inst: ProblemInstance, rows: Iterable[IntVec],
                      q: Fraction, prec: int) -> list[list]:
    """Scaled lattice images as MPFR numbers built from exact coordinates.

    Plain floats lose the nearly-cancelled coordinates ``xi*x - y`` once
    ``x`` is large; the unimodular transform chosen from such garbage is
    still *valid* but useless, so the rows are assembled in MPFR from
    the symbolically-exact coordinate values.
    """
    from gmpy2 import mpfr, mpq

    with gmpy2.context(precision=prec):
        scales = [gmpy2.exp(mpfr(mpq(-q))),
                  gmpy2.exp(mpfr(mpq(inst.weights.nu1 * q))),
                  gmpy2.exp(mpfr(mpq(inst.weights.nu2 * q)))]
        out = []
        for v in rows:
            x, c1, c2 = coordinates_exact(inst, v)
            coords = [Interval.from_fraction(Fraction(x), prec).lo,
                      ex_interval(c1, prec).lo, ex_interval(c2, prec).lo]
            out.append([coords[j] * scales[j] for j in range(3)])
    return out


def _lll_transform(basis: list[list], prec: int, delta: float = 0.75
                   ) -> list[list[int]]:
    """Unimodular U with U*basis LLL-reduced; MPFR arithmetic at prec.

    Only selects a transform -- no certification is needed here, a poor
    U merely enlarges later enumeration bounds.
    """
    n = len(basis)
    with gmpy2.context(precision=prec):
        b = [row[:] for row in basis]
        u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

        def gso():
            star = []
            mu = [[gmpy2.mpfr(0)] * n for _ in range(n)]
            for i in range(n):
                w = b[i][:]
                for j in range(i):
                    denom = sum(c * c for c in star[j])
                    mu[i][j] = gmpy2.mpfr(0) if denom == 0 else \
                        sum(x * y for x, y in zip(b[i], star[j])) / denom
                    w = [x - mu[i][j] * y for x, y in zip(w, star[j])]
                star.append(w)
            return star, mu

        k, rounds = 1, 0
        while k < n and rounds < 1000:
            rounds += 1
            star, mu = gso()
            for j in range(k - 1, -1, -1):
                r = int(gmpy2.rint(mu[k][j]))
                if r:
                    b[k] = [x - r * y for x, y in zip(b[k], b[j])]
                    u[k] = [x - r * y for x, y in zip(u[k], u[j])]
                    star, mu = gso()
            norm = lambda w: sum(c * c for c in w)
            if norm(star[k]) >= (delta - mu[k][k - 1] ** 2) * norm(star[k - 1]):
                k += 1
            else:
                b[k], b[k - 1] = b[k - 1], b[k]
                u[k], u[k - 1] = u[k - 1], u[k]
                k = max(k - 1, 1)
    return u


def _det3(rows) -> int:
    (a, b, c) = rows
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _reduced_rows(inst: ProblemInstance, q: Fraction,
                  prec: int) -> tuple[IntVec, IntVec, IntVec]:
    """Unimodular basis (rows) of Z^3, first row ~ shortest at q."""
    std = (IntVec(1, 0, 0), IntVec(0, 1, 0), IntVec(0, 0, 1))
    work_prec = max(prec, 192)
    fl = _mpfr_scaled_rows(inst, std, q, work_prec)
    u = _lll_transform(fl, work_prec)
    rows = [IntVec(*r) for r in u]
    if abs(_det3(u)) != 1:  # LLL went off the rails; fall back
        rows = list(std)
    # put the (heuristically) shortest row first: quotient base quality
    fl2 = _mpfr_scaled_rows(inst, rows, q, work_prec)
    order = sorted(range(3), key=lambda i: max(abs(c) for c in fl2[i]))
    rows = [rows[i] for i in order]
    return rows[0], rows[1], rows[2]


# -- class/m enumeration ----------------------------------------------------


def _adjugate3(rows) -> list[list[int]]:
    m = [[rows[0].x, rows[0].y1, rows[0].y2],
         [rows[1].x, rows[1].y1, rows[1].y2],
         [rows[2].x, rows[2].y1, rows[2].y2]]
    cof = [[(m[(i + 1) % 3][(j + 1) % 3] * m[(i + 2) % 3][(j + 2) % 3]
             - m[(i + 1) % 3][(j + 2) % 3] * m[(i + 2) % 3][(j + 1) % 3])
            for j in range(3)] for i in range(3)]
    return [[cof[j][i] for j in range(3)] for i in range(3)]  # transpose


def _class_bounds(inst: ProblemInstance, rows, q_ends: tuple[Fraction, Fraction],
                  e_form: AffineLogForm, prec: int) -> tuple[int, int]:
    """Certified bounds |a| <= Na, |b| <= Nb for envelope-relevant classes.

    Coordinates of any relevant vector w satisfy |w_k| <= exp(E(q)), and
    (m, a, b) = w * A^{-1} with A^{-1} = D^{-1} M T^{-1}; each summand is
    log-affine in q, hence maximized at a window end.
    """
    det = _det3([[r.x, r.y1, r.y2] for r in rows])
    adj = _adjugate3(rows)  # T^{-1} = adj / det, det = +-1
    tinv = [[adj[i][j] * det for j in range(3)] for i in range(3)]
    xi1_iv = ex_interval(inst.xi1, prec)
    xi2_iv = ex_interval(inst.xi2, prec)
    m_rows = [(Interval.point(1), xi1_iv, xi2_iv),
              (Interval.point(0), Interval.point(-1), Interval.point(0)),
              (Interval.point(0), Interval.point(0), Interval.point(-1))]
    slopes = (Fraction(-1), inst.weights.nu1, inst.weights.nu2)
    bounds = []
    for j in (1, 2):  # columns for a and b
        total = Interval.point(0)
        for k in range(3):
            g_kj = Interval.point(0)
            for l in range(3):
                g_kj = g_kj.add(
                    m_rows[k][l].mul_fraction(Fraction(tinv[l][j]), prec), prec)
            mag_hi = max(abs(g_kj.lo), abs(g_kj.hi))
            term_hi = None
            for q_end in set(q_ends):
                expo = e_form.eval_fraction(q_end, prec).sub(
                    Interval.from_fraction(slopes[k] * q_end, prec), prec)
                cand = expo.exp(prec).mul(Interval(mag_hi, mag_hi), prec)
                term_hi = cand if term_hi is None else \
                    Interval.hull(term_hi, cand)
            total = total.add(term_hi, prec)
        bounds.append(int(gmpy2.ceil(total.hi)))
    return bounds[0], bounds[1]


def _balance_m_candidates(inst: ProblemInstance, v1: IntVec, lift: IntVec,
                          q_ends, prec: int, pad: int = 2) -> set[int]:
    """Integer m candidates so that some minimizer of lambda(m*v1 + lift)
    over each q in the window is included (constrained variants covered
    by the pad).  Balance points of coordinate pairs are monotone in q,
    so window ends suffice."""
    base = coordinates_exact(inst, v1)
    offs = coordinates_exact(inst, lift)
    slopes = (Fraction(-1), inst.weights.nu1, inst.weights.nu2)
    active = [j for j in range(3) if not ex_is_zero(_as_exact(base[j]))]
    cands: set[int] = set()

    def add_around(iv: Interval):
        lo = int(gmpy2.floor(iv.lo)) - pad
        hi = int(gmpy2.ceil(iv.hi)) + pad
        if hi - lo > 512:
            # genuine drift of the optimizers across the window; the
            # caller must shrink the window, more precision cannot help
            raise PoolTooLarge("balance span too wide for this window")
        cands.update(range(lo, hi + 1))

    zs: dict[int, ExactReal] = {}
    weight_forms: dict[int, AffineLogForm] = {}
    for j in active:
        bj, oj = _as_exact(base[j]), _as_exact(offs[j])
        zs[j] = -(oj / bj)
        weight_forms[j] = AffineLogForm.of_log(ex_abs(bj), slopes[j])
        add_around(ex_interval(zs[j], prec))
    for i in active:
        for j in active:
            if j <= i:
                continue
            # balance of |m - z_i| * w_i = |m - z_j| * w_j at a window
            # end: m = (z_i*t + z_j)/(t + 1) with t = w_i/w_j.  Between
            # the ends the balance moves monotonically (the weight ratio
            # is monotone in q), so the hull over both ends covers every
            # intermediate optimizer.
            b_ivs = []
            for q_end in set(q_ends):
                t = weight_forms[i].sub(weight_forms[j]).eval_fraction(
                    q_end, prec).exp(prec)
                zi = ex_interval(zs[i], prec)
                zj = ex_interval(zs[j], prec)
                num = zi.mul(t, prec).add(zj, prec)
                den = t.add(Interval.point(1), prec)
                b_ivs.append(num.div(den, prec))
            add_around(Interval.hull(*b_ivs))
    return cands


def _as_exact(value) -> ExactReal:
    return Fraction(value) if isinstance(value, int) else value


def _sup_log_interval(inst, v: IntVec, q: Fraction, prec: int) -> Interval:
    return _L_interval(vector_terms(inst, v), q, prec)


def _enumerate_pool(inst: ProblemInstance, q0: Fraction, q1: Fraction,
                    e_form: AffineLogForm, prec: int) -> list[IntVec]:
    """Certified superset of every vector that can enter the three-minima
    envelope anywhere in [q0, q1], given L3(q) <= E(q) on the window."""
    v1, u2, u3 = _reduced_rows(inst, q0, prec)
    na, nb = _class_bounds(inst, (v1, u2, u3), (q0, q1), e_form, prec)
    if (2 * na + 1) * (2 * nb + 1) > _CLASS_CAP:
        raise PoolTooLarge(f"class enumeration bounds too large ({na} x {nb})")
    out: dict[IntVec, None] = {v1.canonical(): None}
    for a in range(0, na + 1):
        for b in range(-nb, nb + 1):
            if a == 0 and b <= 0:
                continue  # (a,b) and (-a,-b) give mirrored vectors
            lift = IntVec(a * u2.x + b * u3.x,
                          a * u2.y1 + b * u3.y1,
                          a * u2.y2 + b * u3.y2)
            for m in _balance_m_candidates(inst, v1, lift, (q0, q1), prec):
                v = IntVec(lift.x + m * v1.x, lift.y1 + m * v1.y1,
                           lift.y2 + m * v1.y2)
                if v.is_zero():
                    continue
                out[v.primitive().canonical()] = None
    return list(out.keys())


def _prune_pool(inst: ProblemInstance, pool: list[IntVec], q0: Fraction,
                q1: Fraction, e_form: AffineLogForm, prec: int) -> list[IntVec]:
    """Drop vectors certainly above the envelope bound on all of [q0, q1].

    L_v - E is convex piecewise linear, so its minimum over the window is
    at an endpoint or at an internal term crossing; evaluating all of
    them (even crossings outside the window) is conservative.
    """
    e_hi = max(e_form.eval_fraction(q0, prec).hi,
               e_form.eval_fraction(q1, prec).hi)
    kept = []
    for v in pool:
        terms = vector_terms(inst, v)
        # cheap certified lower bound: min over the window of a max of
        # affine terms is at least the best per-term endpoint minimum
        floor_lo = None
        for t in terms:
            at = t.eval_fraction(q0 if t.slope > 0 else q1, prec).lo
            floor_lo = at if floor_lo is None else max(floor_lo, at)
        if floor_lo > e_hi:
            continue
        points: list = [q0, q1]
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                c = crossing(terms[i], terms[j])
                if c is not None:
                    points.append(c)
        drop = True
        for p in points:
            vals = [t.eval_qpoint(p, prec) for t in terms]
            lv = Interval(max(i.lo for i in vals), max(i.hi for i in vals))
            ev = e_form.eval_qpoint(p, prec)
            if not lv.lo > ev.hi:
                drop = False
                break
        if not drop:
            kept.append(v)
    return kept


# -- pointwise successive minima -------------------------------------------


def _dominant_form(inst, v: IntVec, q: Fraction, prec: int) -> AffineLogForm:
    """The term achieving the max at q (largest slope among exact ties)."""
    terms = vector_terms(inst, v)
    best = terms[0]
    best_iv = best.eval_fraction(q, prec)
    for t in terms[1:]:
        iv = t.eval_fraction(q, prec)
        if iv.lo > best_iv.hi:
            best, best_iv = t, iv
            continue
        if iv.hi < best_iv.lo:
            continue
        s = sign_at_once(t.sub(best), q, prec)
        if s > 0 or (s == 0 and t.slope > best.slope):
            best, best_iv = t, iv
    return best


def _sorted_entries(inst, pool: list[IntVec], q: Fraction, prec: int
                    ) -> list[tuple[IntVec, AffineLogForm, Interval]]:
    """Pool sorted by certified L value at q; exact algebra only on overlap."""
    import functools

    entries = []
    for v in pool:
        form = _dominant_form(inst, v, q, prec)
        entries.append((v, form, form.eval_fraction(q, prec)))

    def cmp(e1, e2):
        iv1, iv2 = e1[2], e2[2]
        if iv1.hi < iv2.lo:
            return -1
        if iv1.lo > iv2.hi:
            return 1
        s = sign_at_once(e1[1].sub(e2[1]), q, prec)
        if s != 0:
            return s
        k1, k2 = e1[0].lex_key(), e2[0].lex_key()
        return -1 if k1 < k2 else (1 if k1 > k2 else 0)

    entries.sort(key=functools.cmp_to_key(cmp))
    return entries


def _rank_of(vectors: list[IntVec]) -> int:
    if not vectors:
        return 0
    if len(vectors) == 1:
        return 1
    if len(vectors) == 2:
        (a, b) = vectors
        cross = (a.y1 * b.y2 - a.y2 * b.y1,
                 a.y2 * b.x - a.x * b.y2,
                 a.x * b.y1 - a.y1 * b.x)
        return 1 if cross == (0, 0, 0) else 2
    return 3 if _det3([[v.x, v.y1, v.y2] for v in vectors[:3]]) != 0 else 2


def _seed_envelope_form(inst: ProblemInstance, q: Fraction,
                        prec: int) -> AffineLogForm:
    """An exact-constant form E with L3(q) <= E(q), from an independent seed triple."""
    v1, u2, u3 = _reduced_rows(inst, q, prec)
    hi = None
    for base in (v1, u2, u3):
        # best representative of the seed vector modulo v1 (for u2, u3)
        cand_ms = {0} if base is v1 else \
            _balance_m_candidates(inst, v1, base, (q, q), prec)
        best = None
        for m in cand_ms:
            v = base if base is v1 else IntVec(
                base.x + m * v1.x, base.y1 + m * v1.y1, base.y2 + m * v1.y2)
            if v.is_zero():
                continue
            iv = _sup_log_interval(inst, v, q, prec)
            if best is None or iv.hi < best.hi:
                best = iv
        hi = best.hi if hi is None else max(hi, best.hi)
    return AffineLogForm.constant(mpfr_to_fraction(hi))


def successive_minima(inst: ProblemInstance, q: Fraction,
                      policy: Optional[PrecisionPolicy] = None) -> MinimaAtQ:
    """Exact three minima with witnesses at rational ``q >= 0``.

    The returned L values are certified enclosures of the exact minima;
    the witness triple has nonzero determinant.  Ties are broken by the
    lexicographic key (|x|, x, y1, y2).
    """
    q = Fraction(q)
    if q < 0:
        raise OutOfRange("q must be nonnegative")
    policy = policy or inst.policy
    for prec in policy.ladder():
        try:
            return _sm_at(inst, q, prec)
        except UndecidableComparison:
            continue
    raise PrecisionExhausted(f"successive minima at q={q} undecidable at "
                             f"max_bits={policy.max_bits}")


def _sm_at(inst: ProblemInstance, q: Fraction, prec: int) -> MinimaAtQ:
    e_form = _seed_envelope_form(inst, q, prec)
    pool = _enumerate_pool(inst, q, q, e_form, prec)
    pool = _prune_pool(inst, pool, q, q, e_form, prec)
    ranked = _sorted_entries(inst, pool, q, prec)
    chosen: list[tuple[IntVec, AffineLogForm]] = []
    for v, form, _ in ranked:
        if _rank_of([w for w, _ in chosen] + [v]) == len(chosen) + 1:
            chosen.append((v, form))
            if len(chosen) == 3:
                break
    if len(chosen) < 3:
        raise RuntimeError("pool missed an independent triple (internal bug)")
    witnesses = tuple(v for v, _ in chosen)
    forms = tuple(f for _, f in chosen)
    ls = tuple(f.eval_fraction(q, prec) for f in forms)
    return MinimaAtQ(q=q, L=ls, witnesses=witnesses, forms=forms)


# -- public candidate enumeration ------------------------------------------


def candidate_set(inst: ProblemInstance, q: Fraction, radius: Fraction,
                  policy: Optional[PrecisionPolicy] = None) -> list[IntVec]:
    """Every nonzero ``v`` (canonical sign) with ``lambda_v(q) <= radius``.

    Completeness is the contract.  Boundary cases ``lambda_v == radius``
    are resolved exactly.  Intended for moderate radii; the number of
    returned vectors grows cubically with the radius.
    """
    q = Fraction(q)
    radius = Fraction(radius)
    if q < 0:
        raise OutOfRange("q must be nonnegative")
    if radius <= 0:
        return []
    policy = policy or inst.policy
    log_radius = AffineLogForm.of_log(radius) if radius != 1 else AffineLogForm()
    for prec in policy.ladder():
        try:
            return _candidate_set_at(inst, q, radius, log_radius, prec)
        except UndecidableComparison:
            continue
    raise PrecisionExhausted("candidate_set undecidable at max precision")


def _candidate_set_at(inst, q, radius, log_radius, prec) -> list[IntVec]:
    rows = _reduced_rows(inst, q, prec)
    v1, u2, u3 = rows
    na, nb = _class_bounds(inst, rows, (q, q), log_radius, prec)
    if (2 * na + 1) * (2 * nb + 1) > _CLASS_CAP:
        raise RuntimeError("radius too large for literal enumeration")
    slopes = (Fraction(-1), inst.weights.nu1, inst.weights.nu2)
    base = coordinates_exact(inst, v1)
    out: set[IntVec] = set()

    def level_interval(j: int, q_: Fraction) -> Interval:
        # radius * e^{-s_j q} as an interval
        return Interval.from_fraction(radius, prec).mul(
            Interval.from_fraction(-slopes[j] * q_, prec).exp(prec), prec)

    total = 0
    for a in range(0, na + 1):
        for b in range(-nb, nb + 1):
            if a == 0 and b <= 0:
                continue
            lift = IntVec(a * u2.x + b * u3.x, a * u2.y1 + b * u3.y1,
                          a * u2.y2 + b * u3.y2)
            offs = coordinates_exact(inst, lift)
            m_lo, m_hi = None, None
            feasible = True
            for j in range(3):
                bj = _as_exact(base[j])
                oj = _as_exact(offs[j])
                if ex_is_zero(bj):
                    continue
                lvl = level_interval(j, q)
                bj_iv = ex_interval(bj, prec)
                oj_iv = ex_interval(oj, prec)
                end1 = oj_iv.neg().sub(lvl, prec).div(bj_iv, prec)
                end2 = oj_iv.neg().add(lvl, prec).div(bj_iv, prec)
                span = Interval.hull(end1, end2)
                jlo = int(gmpy2.floor(span.lo))
                jhi = int(gmpy2.ceil(span.hi))
                m_lo = jlo if m_lo is None else max(m_lo, jlo)
                m_hi = jhi if m_hi is None else min(m_hi, jhi)
                if m_lo > m_hi:
                    feasible = False
                    break
            if not feasible or m_lo is None:
                continue
            if m_hi - m_lo > _ENUM_CAP:
                raise RuntimeError("radius too large for literal enumeration")
            for m in range(m_lo, m_hi + 1):
                v = IntVec(lift.x + m * v1.x, lift.y1 + m * v1.y1,
                           lift.y2 + m * v1.y2)
                if v.is_zero():
                    continue
                total += 1
                if total > _ENUM_CAP:
                    raise RuntimeError("radius too large for literal enumeration")
                if _lambda_le(inst, v, q, log_radius, prec):
                    out.add(v.canonical())
    # multiples of the quotient base vector itself
    k = 1
    while True:
        v = IntVec(k * v1.x, k * v1.y1, k * v1.y2)
        if not _lambda_le(inst, v, q, log_radius, prec):
            break
        out.add(v.canonical())
        k += 1
        if k > _ENUM_CAP:
            raise RuntimeError("radius too large for literal enumeration")
    return sorted(out, key=IntVec.lex_key)


def _lambda_le(inst, v: IntVec, q: Fraction, log_radius: AffineLogForm,
               prec: int) -> bool:
    """Exact decision of ``L_v(q) <= log radius``."""
    for t in vector_terms(inst, v):
        if sign_at_once(t.sub(log_radius), q, prec) > 0:
            return False
    return True
