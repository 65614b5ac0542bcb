"""Sum-zero normalization, psi functions, and interval structure detection.

The minima triple is recentered to ``P_i = L_i - (L1+L2+L3)/3`` so that
``P1+P2+P3 == 0`` identically (exact form arithmetic).  On the recentered
triple the detector finds the alternating *top* intervals (where the gap
``P3-P2`` returns to the threshold ``4c`` while ``P2-P1`` stays above it)
and *bottom* intervals (the mirror image), classifies them by the shape
of the outer function on the adjacent gap, and locates the slope-switch
point inside each between-interval stretch.  Finite-window estimates of
the limit constants ``liminf/limsup P_i(q)/q`` are taken over segment
endpoints, which is exact because ``(const + s*q)/q`` is monotone on a
segment.

Everything here also accepts synthetic piecewise-linear triples with
rational data (used heavily by the structure tests), in which case each
decision is plain rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import (ConfigError, OutOfRange, PrecisionExhausted,
                     UndecidableComparison, WindowTooShort)
from .forms import (AffineLogForm, FormRoot, QPoint, compare_qpoints,
                    form_sign_at, qpoint_interval)
from .intervals import Interval, Ordering, PrecisionPolicy
from .trajectory import MinimaTrajectory

LOG6 = AffineLogForm.of_log(Fraction(6))


def default_c() -> AffineLogForm:
    """The concrete threshold constant: log 6 (from the minima product bounds)."""
    return LOG6


def default_C(c: AffineLogForm | None = None) -> AffineLogForm:
    return (c or LOG6).scale(Fraction(21))


@dataclass
class TripleSegment:
    q_start: QPoint
    q_end: QPoint
    forms: tuple[AffineLogForm, AffineLogForm, AffineLogForm]
    #: slopes used for switch-point detection: the raw minima slopes for
    #: lattice-derived triples, the (canonical) P slopes for synthetic ones
    switch_slopes: tuple[Fraction, Fraction, Fraction]

    @property
    def p_slopes(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(f.slope for f in self.forms)


@dataclass
class NormalizedTriple:
    """Piecewise-affine sum-zero triple (P1, P2, P3) over [q_min, q_max]."""

    segments: list[TripleSegment]
    q_min: Fraction
    q_max: Fraction
    weights: tuple[Fraction, Fraction]
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)
    base: Optional[MinimaTrajectory] = None

    def breakpoints(self):
        for seg in self.segments:
            yield seg.q_start
        yield self.segments[-1].q_end

    def segment_at(self, q: Fraction) -> TripleSegment:
        q = Fraction(q)
        if q < self.q_min or q > self.q_max:
            raise OutOfRange(f"q={q} outside [{self.q_min}, {self.q_max}]")
        lo, hi = 0, len(self.segments) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if compare_qpoints(q, self.segments[mid].q_end, self.policy) \
                    == Ordering.GREATER:
                lo = mid + 1
            else:
                hi = mid
        return self.segments[lo]

    def eval_p(self, i: int, q: Fraction, prec: Optional[int] = None) -> Interval:
        """Certified P_i(q), i in {1, 2, 3}."""
        if i not in (1, 2, 3):
            raise OutOfRange("index must be 1, 2 or 3")
        prec = prec or self.policy.start_bits
        return self.segment_at(q).forms[i - 1].eval_fraction(Fraction(q), prec)

    def validate_sum_zero(self) -> None:
        for seg in self.segments:
            total = seg.forms[0].add(seg.forms[1]).add(seg.forms[2])
            if not total.is_identically_zero():
                raise ConfigError("triple does not sum to zero")

    @property
    def all_rational(self) -> bool:
        return all(not f.logs for seg in self.segments for f in seg.forms)


def normalize(traj: MinimaTrajectory) -> NormalizedTriple:
    """Mean recentering: P_i = L_i - (L1+L2+L3)/3, exact on forms."""
    segs = []
    for seg in traj.segments:
        mean = seg.lines[0].add(seg.lines[1]).add(seg.lines[2]).scale(Fraction(1, 3))
        forms = tuple(line.sub(mean) for line in seg.lines)
        segs.append(TripleSegment(
            q_start=seg.q_start, q_end=seg.q_end, forms=forms,
            switch_slopes=tuple(line.slope for line in seg.lines)))
    triple = NormalizedTriple(
        segments=segs, q_min=traj.q_min, q_max=traj.q_max,
        weights=(traj.instance.weights.nu1, traj.instance.weights.nu2),
        policy=traj.instance.policy, base=traj)
    triple.validate_sum_zero()
    return triple


def synthetic_triple(q_min: Fraction, p_start: tuple[Fraction, Fraction, Fraction],
                     pieces: list[tuple[tuple[Fraction, Fraction, Fraction], Fraction]],
                     weights: tuple[Fraction, Fraction],
                     policy: Optional[PrecisionPolicy] = None) -> NormalizedTriple:
    """Build an exact piecewise-linear sum-zero triple from slope runs.

    ``pieces`` is a list of ``(slopes, length)``; values are propagated
    by continuity.  Raises when the data does not sum to zero.
    """
    if sum(p_start) != 0:
        raise ConfigError("initial values must sum to zero")
    q = Fraction(q_min)
    vals = tuple(Fraction(v) for v in p_start)
    segs: list[TripleSegment] = []
    for slopes, length in pieces:
        slopes = tuple(Fraction(s) for s in slopes)
        length = Fraction(length)
        if sum(slopes) != 0:
            raise ConfigError("piece slopes must sum to zero")
        if length <= 0:
            raise ConfigError("piece length must be positive")
        forms = tuple(
            AffineLogForm(const=vals[i] - slopes[i] * q, logs=(), slope=slopes[i])
            for i in range(3))
        segs.append(TripleSegment(q_start=q, q_end=q + length, forms=forms,
                                  switch_slopes=slopes))
        vals = tuple(vals[i] + slopes[i] * length for i in range(3))
        q += length
    triple = NormalizedTriple(segments=segs, q_min=Fraction(q_min), q_max=q,
                              weights=(Fraction(weights[0]), Fraction(weights[1])),
                              policy=policy or PrecisionPolicy())
    triple.validate_sum_zero()
    return triple


def triple_from_json(text: str, policy: Optional[PrecisionPolicy] = None
                     ) -> NormalizedTriple:
    """Load a synthetic triple from its JSON document (see README schema)."""
    try:
        doc = json.loads(text)
        q_min = Fraction(doc["q_min"])
        p0 = tuple(Fraction(v) for v in doc["p_at_q_min"])
        weights = tuple(Fraction(w) for w in doc["weights"])
        pieces = [(tuple(Fraction(s) for s in piece["slopes"]),
                   Fraction(piece["length"])) for piece in doc["pieces"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad triple JSON: {exc}") from exc
    return synthetic_triple(q_min, p0, pieces, weights, policy)


def psi(triple: NormalizedTriple, i: int, q: Fraction,
        prec: Optional[int] = None) -> Interval:
    """``psi_i(q) = P_i(q)/q`` for q > 0 inside the window."""
    q = Fraction(q)
    if q <= 0:
        raise OutOfRange("psi requires q > 0")
    prec = prec or triple.policy.start_bits
    p = triple.eval_p(i, q, prec)
    return p.mul_fraction(Fraction(1, 1) / q, prec)


def _psi_at_point(triple: NormalizedTriple, form: AffineLogForm, point: QPoint,
                  prec: int) -> Interval:
    val = form.eval_qpoint(point, prec)
    q_iv = qpoint_interval(point, prec)
    if q_iv.lo <= 0:
        raise UndecidableComparison("psi point enclosure touches zero")
    return val.div(q_iv, prec)


# -- structure detection -----------------------------------------------------


@dataclass
class StructureAnnotation:
    threshold_c: AffineLogForm
    threshold_C: AffineLogForm
    degenerate_flag: bool
    top_intervals: list[tuple[QPoint, QPoint]] = field(default_factory=list)
    bottom_intervals: list[tuple[QPoint, QPoint]] = field(default_factory=list)
    top_types: list[Optional[int]] = field(default_factory=list)
    bottom_types: list[Optional[int]] = field(default_factory=list)
    #: r_j for each adjacent (T_j, B_j) pair, aligned with interval_pairs
    switch_points: list[Optional[QPoint]] = field(default_factory=list)
    #: indices (top_index, bottom_index) of each I_j = [b_j, a*_j] stretch
    interval_pairs: list[tuple[int, int]] = field(default_factory=list)
    extremum_points_top: list[QPoint] = field(default_factory=list)
    extremum_points_bottom: list[QPoint] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _sign_sequence(triple: NormalizedTriple, g_of, policy: PrecisionPolicy):
    """Zeros (with side signs) of a piecewise-affine functional of the triple.

    ``g_of(segment) -> AffineLogForm``.  Returns (points, signs, touches):
    signs[k] is the constant sign of g strictly between points[k] and
    points[k+1]; ``touches`` are isolated zeros without a sign change
    (the single-point interval case).
    """
    points: list[QPoint] = [triple.segments[0].q_start]
    signs: list[int] = []
    zero_points: list[QPoint] = []
    for seg in triple.segments:
        g = g_of(seg)
        s_start = form_sign_at(g, seg.q_start, policy)
        s_end = form_sign_at(g, seg.q_end, policy)
        if s_start == 0:
            zero_points.append(seg.q_start)
        if s_start == 0 and s_end == 0:
            # identically-zero plateau (slope must be 0)
            signs.append(0)
            points.append(seg.q_end)
            continue
        if s_start != 0 and s_end != 0 and s_start != s_end:
            root = FormRoot(g)
            zero_points.append(root)
            signs.append(s_start)
            points.append(root)
            signs.append(s_end)
            points.append(seg.q_end)
            continue
        # at most one endpoint zero; interior sign is the nonzero one
        interior = s_start if s_start != 0 else s_end
        signs.append(interior)
        points.append(seg.q_end)
    last_sign = form_sign_at(g_of(triple.segments[-1]),
                             triple.segments[-1].q_end, policy)
    if last_sign == 0:
        zero_points.append(triple.segments[-1].q_end)
    # merge consecutive spans with identical sign
    m_pts = [points[0]]
    m_signs = []
    for k, s in enumerate(signs):
        if m_signs and m_signs[-1] == s:
            m_pts[-1] = points[k + 1]
            continue
        m_signs.append(s)
        m_pts.append(points[k + 1])
    # touches: zeros strictly inside a span of constant nonzero sign
    touches = []
    for z in zero_points:
        crossing_zero = any(
            compare_qpoints(z, m_pts[k + 1], policy) == Ordering.EQUAL
            for k in range(len(m_signs) - 1)
            if m_signs[k] != m_signs[k + 1])
        if not crossing_zero:
            touches.append(z)
    return m_pts, m_signs, touches


def _zero_locations(points, signs, touches):
    """All zero locations: sign changes plus isolated touches, ordered."""
    zeros = list(touches)
    for k in range(len(signs) - 1):
        if signs[k] != signs[k + 1]:
            zeros.append(points[k + 1])
    return zeros


def detect_structure(triple: NormalizedTriple,
                     c: AffineLogForm | Fraction | None = None,
                     C: AffineLogForm | Fraction | None = None,
                     policy: Optional[PrecisionPolicy] = None) -> StructureAnnotation:
    """Find top/bottom intervals, their types and switch points.

    Degenerate regime: if ``P3 - P1 <= C`` everywhere on the trailing
    half of the window, the annotation carries ``degenerate_flag`` and
    empty interval lists.
    """
    policy = policy or triple.policy
    c_form = _as_threshold(c) if c is not None else default_c()
    C_form = _as_threshold(C) if C is not None else default_C(c_form)
    margin = C_form.sub(c_form.scale(Fraction(20)))
    if form_sign_at(margin, Fraction(1), policy) <= 0:
        raise ConfigError("need C > 20c")
    four_c = c_form.scale(Fraction(4))

    ann = StructureAnnotation(threshold_c=c_form, threshold_C=C_form,
                              degenerate_flag=False)

    # degenerate test on the trailing half-window
    tail_start = triple.q_min + (triple.q_max - triple.q_min) / 2
    exceeded = False
    for seg in triple.segments:
        spread = seg.forms[2].sub(seg.forms[0]).sub(C_form)
        for point in (seg.q_start, seg.q_end):
            if _point_before(point, tail_start, policy):
                continue
            if form_sign_at(spread, point, policy) > 0:
                exceeded = True
                break
        if exceeded:
            break
    if not exceeded:
        ann.degenerate_flag = True
        return ann

    g_top = lambda seg: seg.forms[2].sub(seg.forms[1]).sub(four_c)
    g_bot = lambda seg: seg.forms[1].sub(seg.forms[0]).sub(four_c)
    pts_t, signs_t, touch_t = _sign_sequence(triple, g_top, policy)
    pts_b, signs_b, touch_b = _sign_sequence(triple, g_bot, policy)
    zeros_t = sorted(_zero_locations(pts_t, signs_t, touch_t),
                     key=lambda p: _sort_key(p, policy))
    zeros_b = sorted(_zero_locations(pts_b, signs_b, touch_b),
                     key=lambda p: _sort_key(p, policy))

    def positive_regions(points, signs):
        regions = []
        for k, s in enumerate(signs):
            if s > 0:
                interior = (k > 0, k < len(signs) - 1)  # bounded by true zeros?
                regions.append((points[k], points[k + 1], interior))
        return regions

    # top intervals: inside regions where g_bot > 0, the first and last
    # zero of g_top; bottoms are the mirror image
    tops = _intervals_in_regions(positive_regions(pts_b, signs_b), zeros_t,
                                 policy, ann, "top")
    bottoms = _intervals_in_regions(positive_regions(pts_t, signs_t), zeros_b,
                                    policy, ann, "bottom")

    ordered = sorted([(iv, "T", k) for k, iv in enumerate(tops)] +
                     [(iv, "B", k) for k, iv in enumerate(bottoms)],
                     key=lambda item: _sort_key(item[0][0], policy))
    for k in range(len(ordered) - 1):
        if ordered[k][1] == ordered[k + 1][1]:
            ann.notes.append("adjacent intervals of the same kind detected")
    ann.top_intervals = tops
    ann.bottom_intervals = bottoms

    _classify_types(triple, ann, policy)
    _locate_switch_points(triple, ann, policy)
    return ann


def _as_threshold(value) -> AffineLogForm:
    if isinstance(value, AffineLogForm):
        return value
    return AffineLogForm.constant(Fraction(value))


def _point_before(x: QPoint, bound: Fraction, policy) -> bool:
    return compare_qpoints(x, bound, policy) == Ordering.LESS


def _sort_key(point: QPoint, policy):
    return float(qpoint_interval(point, 64).lo)


def _intervals_in_regions(regions, zeros, policy, ann, kind):
    out = []
    for start, end, (closed_left, closed_right) in regions:
        inside = [z for z in zeros
                  if compare_qpoints(z, start, policy) != Ordering.LESS
                  and compare_qpoints(z, end, policy) != Ordering.GREATER]
        if not inside:
            continue
        if not (closed_left and closed_right):
            ann.notes.append(
                f"{kind} interval candidate in a window-truncated region skipped")
            continue
        out.append((inside[0], inside[-1]))
    return out


def _classify_types(triple: NormalizedTriple, ann: StructureAnnotation,
                    policy: PrecisionPolicy) -> None:
    """Type 1/2 classification via the outer function on the adjacent gap."""
    tops, bottoms = ann.top_intervals, ann.bottom_intervals
    ann.bottom_types = [None] * len(bottoms)
    ann.top_types = [None] * len(tops)

    # B_j: behaviour of P1 on [b*_j, a*_{j+1}]
    for j in range(len(bottoms) - 1):
        lo, hi = bottoms[j][1], bottoms[j + 1][0]
        where, interior = _extremum(triple, 0, lo, hi, policy, minimum=True)
        if interior:
            ann.bottom_types[j] = 1
            ann.extremum_points_bottom.append(where)
        elif compare_qpoints(where, lo, policy) == Ordering.EQUAL:
            ann.bottom_types[j] = 2
        else:
            ann.notes.append(f"bottom interval {j}: outer minimum at the far end")

    # T_j: behaviour of P3 on [b_{j-1}, a_j]
    for j in range(1, len(tops)):
        lo, hi = tops[j - 1][1], tops[j][0]
        where, interior = _extremum(triple, 2, lo, hi, policy, minimum=False)
        if interior:
            ann.top_types[j] = 1
            ann.extremum_points_top.append(where)
        elif compare_qpoints(where, hi, policy) == Ordering.EQUAL:
            ann.top_types[j] = 2
        else:
            ann.notes.append(f"top interval {j}: outer maximum at the near end")


def _extremum(triple: NormalizedTriple, comp: int, lo: QPoint, hi: QPoint,
              policy: PrecisionPolicy, minimum: bool) -> tuple[QPoint, bool]:
    """Extremum location of a piecewise-affine component on [lo, hi].

    Returns (location, strictly_interior).  Candidates are the stretch
    ends and every segment corner inside; within a segment the function
    is affine, so corners suffice.
    """
    candidates: list[QPoint] = [lo]
    for seg in triple.segments:
        for point in (seg.q_start,):
            if compare_qpoints(point, lo, policy) == Ordering.GREATER and \
                    compare_qpoints(point, hi, policy) == Ordering.LESS:
                candidates.append(point)
    candidates.append(hi)
    best = candidates[0]
    best_idx = 0
    for k, cand in enumerate(candidates[1:], start=1):
        d = _value_diff(triple, comp, cand, best, policy)
        if (d < 0 and minimum) or (d > 0 and not minimum):
            best, best_idx = cand, k
    interior = 0 < best_idx < len(candidates) - 1
    return best, interior


def _value_diff(triple: NormalizedTriple, comp: int, x: QPoint, y: QPoint,
                policy: PrecisionPolicy) -> int:
    """Certified sign of P_comp(x) - P_comp(y)."""
    fx = _form_at(triple, x, comp, policy)
    fy = _form_at(triple, y, comp, policy)
    zero_checked = False
    for prec in policy.ladder():
        try:
            vx = fx.eval_qpoint(x, prec)
            vy = fy.eval_qpoint(y, prec)
        except UndecidableComparison:
            continue
        if vx.hi < vy.lo:
            return -1
        if vx.lo > vy.hi:
            return 1
        if not zero_checked:
            zero_checked = True
            if isinstance(x, Fraction) and isinstance(y, Fraction):
                dx = fx.const + fx.slope * x - fy.const - fy.slope * y
                if not fx.logs and not fy.logs and dx == 0:
                    return 0
    raise PrecisionExhausted("persistent tie comparing P values")


def _form_at(triple: NormalizedTriple, point: QPoint, comp: int,
             policy: PrecisionPolicy) -> AffineLogForm:
    """The P_comp form of a segment containing the point."""
    for seg in triple.segments:
        if compare_qpoints(point, seg.q_start, policy) != Ordering.LESS and \
                compare_qpoints(point, seg.q_end, policy) != Ordering.GREATER:
            return seg.forms[comp]
    raise OutOfRange("point outside the triple window")


def _locate_switch_points(triple: NormalizedTriple, ann: StructureAnnotation,
                          policy: PrecisionPolicy) -> None:
    """r_j inside each I_j = [b_j, a*_j]: the first-minimum slope switch.

    Uses the raw minima slopes (exact members of {-1, nu1, nu2}); within
    I_j the first function must rise, first with nu1 then with nu2.
    """
    nu1, nu2 = triple.weights
    tops, bottoms = ann.top_intervals, ann.bottom_intervals
    bi = 0
    for ti, (a, b) in enumerate(tops):
        while bi < len(bottoms) and \
                compare_qpoints(bottoms[bi][0], b, policy) == Ordering.LESS:
            bi += 1
        if bi >= len(bottoms):
            break
        a_star = bottoms[bi][0]
        ann.interval_pairs.append((ti, bi))
        if nu1 == nu2:
            ann.switch_points.append(None)
            continue
        slopes_seen: list[tuple[QPoint, Fraction]] = []
        for seg in triple.segments:
            if compare_qpoints(seg.q_end, b, policy) != Ordering.GREATER:
                continue
            if compare_qpoints(seg.q_start, a_star, policy) != Ordering.LESS:
                break
            slopes_seen.append((seg.q_start, seg.switch_slopes[0]))
        switch: Optional[QPoint] = None
        clean = True
        prev = None
        for point, s in slopes_seen:
            if s not in (nu1, nu2):
                clean = False
            if prev == nu1 and s == nu2 and switch is None:
                switch = point
            if prev == nu2 and s == nu1:
                clean = False
            prev = s
        if not clean:
            ann.switch_points.append(None)
            ann.notes.append(f"irregular slope pattern inside I_{ti}")
        elif switch is not None:
            ann.switch_points.append(switch)
        elif prev == nu1:
            ann.switch_points.append(a_star)  # nu1 throughout
        else:
            ann.switch_points.append(b)  # nu2 throughout


# -- finite-window approximation constants -----------------------------------


@dataclass
class PhiEstimates:
    """Window extrema of psi_i: finite-window stand-ins for the limit
    constants, together with the localized variants taken only at the
    detected interval endpoints (top right ends / bottom left ends)."""

    phi_upper: tuple[Interval, Interval, Interval]
    phi_lower: tuple[Interval, Interval, Interval]
    window: tuple[Fraction, Fraction]
    localized_phi3_lower: Optional[Interval]
    localized_phi1_upper: Optional[Interval]


def _psi_extrema_points(triple: NormalizedTriple, policy: PrecisionPolicy):
    """Endpoints with q > 0 (psi is monotone within each segment)."""
    pts = []
    for point in triple.breakpoints():
        if isinstance(point, Fraction) and point <= 0:
            continue
        pts.append(point)
    if not pts:
        raise WindowTooShort("no positive endpoints for psi estimates")
    return pts


def _psi_compare(triple: NormalizedTriple, comp: int, x: QPoint, y: QPoint,
                 policy: PrecisionPolicy) -> int:
    """Certified sign of psi(x) - psi(y); exact for rational triples."""
    fx = _form_at(triple, x, comp, policy)
    fy = _form_at(triple, y, comp, policy)
    if isinstance(x, Fraction) and isinstance(y, Fraction) and \
            not fx.logs and not fy.logs:
        vx = (fx.const + fx.slope * x) / x
        vy = (fy.const + fy.slope * y) / y
        return (vx > vy) - (vx < vy)
    for prec in policy.ladder():
        try:
            vx = _psi_at_point(triple, fx, x, prec)
            vy = _psi_at_point(triple, fy, y, prec)
        except UndecidableComparison:
            continue
        if vx.hi < vy.lo:
            return -1
        if vx.lo > vy.hi:
            return 1
    raise PrecisionExhausted("persistent tie comparing psi values")


def estimate_phi(triple: NormalizedTriple, annotation: StructureAnnotation,
                 policy: Optional[PrecisionPolicy] = None) -> PhiEstimates:
    """Max/min of psi_i over segment endpoints, plus localized estimates.

    For a non-degenerate annotation at least two top and two bottom
    intervals are required (WindowTooShort otherwise); the localized
    estimators are None in the degenerate regime.
    """
    policy = policy or triple.policy
    pts = _psi_extrema_points(triple, policy)
    prec = policy.start_bits
    uppers, lowers = [], []
    for comp in range(3):
        hi_pt = max(pts, key=_PsiKey(triple, comp, policy))
        lo_pt = min(pts, key=_PsiKey(triple, comp, policy))
        uppers.append(_psi_at_point(
            triple, _form_at(triple, hi_pt, comp, policy), hi_pt, prec))
        lowers.append(_psi_at_point(
            triple, _form_at(triple, lo_pt, comp, policy), lo_pt, prec))
    q_lo = None
    for point in triple.breakpoints():
        if not (isinstance(point, Fraction) and point <= 0):
            iv = qpoint_interval(point, 64)
            q_lo = triple.q_min if not isinstance(point, Fraction) else point
            break
    window = (max(Fraction(q_lo if isinstance(q_lo, Fraction) else triple.q_min),
                  triple.q_min), triple.q_max)

    if annotation.degenerate_flag:
        return PhiEstimates(tuple(uppers), tuple(lowers), window, None, None)
    if len(annotation.top_intervals) < 2 or len(annotation.bottom_intervals) < 2:
        raise WindowTooShort("need at least two top and two bottom intervals")
    b_points = [iv[1] for iv in annotation.top_intervals]
    a_star_points = [iv[0] for iv in annotation.bottom_intervals]
    b_lo = min(b_points, key=_PsiKey(triple, 2, policy))
    a_hi = max(a_star_points, key=_PsiKey(triple, 0, policy))
    loc3 = _psi_at_point(triple, _form_at(triple, b_lo, 2, policy), b_lo, prec)
    loc1 = _psi_at_point(triple, _form_at(triple, a_hi, 0, policy), a_hi, prec)
    return PhiEstimates(tuple(uppers), tuple(lowers), window, loc3, loc1)


class _PsiKey:
    """Total-order key wrapper so max()/min() use certified comparisons."""

    __slots__ = ("triple", "comp", "policy", "point")

    def __init__(self, triple, comp, policy, point=None):
        self.triple, self.comp, self.policy = triple, comp, policy
        self.point = point

    def __call__(self, point):
        return _PsiKey(self.triple, self.comp, self.policy, point)

    def __lt__(self, other):
        return _psi_compare(self.triple, self.comp, self.point, other.point,
                            self.policy) < 0


# -- monotonicity audit -------------------------------------------------------


@dataclass
class AuditRecord:
    check: str
    location: str
    status: str  # "pass" | "violation" | "skipped" | "unresolved"
    detail: str = ""


@dataclass
class AuditReport:
    records: list[AuditRecord] = field(default_factory=list)

    def add(self, check, location, status, detail=""):
        self.records.append(AuditRecord(check, str(location), status, detail))

    @property
    def hard_violations(self) -> int:
        return sum(1 for r in self.records if r.status == "violation")

    def counts(self) -> dict:
        out: dict[str, int] = {}
        for r in self.records:
            out[r.status] = out.get(r.status, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {"counts": self.counts(),
                "hard_violations": self.hard_violations,
                "records": [{"check": r.check, "location": r.location,
                             "status": r.status, "detail": r.detail}
                            for r in self.records]}


#: slack constant for endpoint-localized bounds (documented: 8c covers the
#: 4c endpoint offsets plus the recentering wiggle)
AUDIT_SLACK_FACTOR = 8


def _sgn_iv(iv: Interval) -> int:
    if iv.hi < 0:
        return -1
    if iv.lo > 0:
        return 1
    return 0


def monotonicity_audit(triple: NormalizedTriple, annotation: StructureAnnotation,
                       policy: Optional[PrecisionPolicy] = None,
                       q_floor: Fraction = Fraction(0)) -> AuditReport:
    """Check the psi-monotonicity facts on the computed trajectory.

    Segments are classified by exact recentered slopes; checks whose
    hypotheses fail (slope not in the canonical pattern, psi gates not
    certifiably satisfied, endpoints below ``q_floor``) are skipped, not
    failed.  A violation requires a certified strict counterexample.
    """
    policy = policy or triple.policy
    prec = policy.start_bits
    nu1, nu2 = triple.weights
    report = AuditReport()
    c_form = annotation.threshold_c
    slack8c = c_form.scale(Fraction(AUDIT_SLACK_FACTOR))

    def loc(point) -> str:
        return f"{float(qpoint_interval(point, 64).lo):.6f}"

    # (a) P1 and P3 nondecreasing (slack 8c) inside each I_j
    for (ti, bi), r in zip(annotation.interval_pairs, annotation.switch_points):
        b = annotation.top_intervals[ti][1]
        a_star = annotation.bottom_intervals[bi][0]
        for comp, name in ((0, "P1"), (2, "P3")):
            prev_pt = None
            for seg in triple.segments:
                if compare_qpoints(seg.q_end, b, policy) != Ordering.GREATER:
                    continue
                if compare_qpoints(seg.q_start, a_star, policy) != Ordering.LESS:
                    break
                for point in (seg.q_start, seg.q_end):
                    if prev_pt is None:
                        prev_pt = point
                        continue
                    drop = _form_at(triple, prev_pt, comp, policy).eval_qpoint(
                        prev_pt, prec).sub(
                        _form_at(triple, point, comp, policy).eval_qpoint(
                            point, prec), prec).sub(
                        slack8c.eval_fraction(Fraction(1), prec), prec)
                    status = "violation" if drop.lo > 0 else "pass"
                    if status == "violation":
                        report.add(f"{name}-nondecreasing-I", loc(point), status,
                                   "drop exceeds 8c inside I_j")
                    prev_pt = point
            report.add(f"{name}-nondecreasing-I", loc(b), "pass",
                       "checked across I_j")

    # (b)/(c) per-segment psi monotonicity with exact slope gates
    canonical = sorted((Fraction(-1), nu1, nu2))
    for seg in triple.segments:
        raw = sorted(seg.switch_slopes)
        if raw != canonical:
            continue  # recentering wiggle: lemma hypotheses not in force
        q_a, q_b = seg.q_start, seg.q_end
        if isinstance(q_a, Fraction) and q_a < q_floor:
            continue
        if isinstance(q_a, Fraction) and q_a <= 0:
            continue
        for comp, name in ((0, "psi1"), (2, "psi3")):
            slope = seg.switch_slopes[comp]
            form = seg.forms[comp]
            try:
                pa = _psi_at_point(triple, form, q_a, prec)
                pb = _psi_at_point(triple, form, q_b, prec)
            except UndecidableComparison:
                report.add(f"{name}-monotone", loc(q_a), "unresolved")
                continue
            if slope == -1:
                expected = -1
            elif comp == 0:
                expected = 1  # P1 increasing => psi1 increasing
            elif slope == nu2:
                gate = _sgn_iv(pa.sub(Interval.from_fraction(nu2, prec), prec))
                if gate >= 0:
                    report.add(f"{name}-monotone", loc(q_a), "skipped",
                               "psi3 not certifiably below nu2")
                    continue
                expected = 1
            else:  # slope nu1: needs psi3 < nu1 on the segment
                gate_a = _sgn_iv(pa.sub(Interval.from_fraction(nu1, prec), prec))
                gate_b = _sgn_iv(pb.sub(Interval.from_fraction(nu1, prec), prec))
                if gate_a >= 0 or gate_b >= 0:
                    report.add(f"{name}-monotone", loc(q_a), "skipped",
                               "hypothesis psi3 < nu1 not certified")
                    continue
                expected = 1
            change = _sgn_iv(pb.sub(pa, prec))
            if change == -expected:
                report.add(f"{name}-monotone", loc(q_a), "violation",
                           f"slope {slope}, psi moved against the lemma")
            elif change == expected:
                report.add(f"{name}-monotone", loc(q_a), "pass")
            else:
                report.add(f"{name}-monotone", loc(q_a), "unresolved")

    # (d) localized bounds inside bottom/top intervals
    _audit_localized(triple, annotation, policy, report, loc)
    return report


def _audit_localized(triple, annotation, policy, report, loc):
    prec = policy.start_bits
    nu1, _ = triple.weights
    c_iv = annotation.threshold_c.eval_fraction(Fraction(1), prec)
    slack = c_iv.mul_fraction(Fraction(AUDIT_SLACK_FACTOR), prec)

    bottoms = annotation.bottom_intervals
    for j in range(len(bottoms) - 1):
        a_star, b_star = bottoms[j]
        a_next = bottoms[j + 1][0]
        f1 = _form_at(triple, a_star, 0, policy)
        f2 = _form_at(triple, a_next, 0, policy)
        psi_a = _psi_at_point(triple, f1, a_star, prec)
        psi_next = _psi_at_point(triple, f2, a_next, prec)
        gate1 = psi_a.sub(Interval.from_fraction(-nu1 / 2, prec), prec)
        gate2 = psi_next.sub(Interval.from_fraction(-nu1, prec), prec)
        if not (gate1.lo > 0 and gate2.lo > 0):
            report.add("psi1-bottom-bound", loc(a_star), "skipped",
                       "gates psi1(a*) > -nu1/2, psi1(a*') > -nu1 not certified")
            continue
        a_iv = qpoint_interval(a_star, prec)
        bound = Interval.hull(psi_a, psi_next).add(slack.div(a_iv, prec), prec)
        worst = None
        for point in _points_between(triple, a_star, b_star, policy):
            val = _psi_at_point(triple, _form_at(triple, point, 0, policy),
                                point, prec)
            worst = val if worst is None else Interval.hull(worst, val)
        if worst is not None and worst.lo > bound.hi:
            report.add("psi1-bottom-bound", loc(a_star), "violation",
                       "psi1 exceeds endpoint bound inside B_j")
        else:
            report.add("psi1-bottom-bound", loc(a_star), "pass")

    tops = annotation.top_intervals
    for j in range(1, len(tops)):
        a_j, b_j = tops[j]
        b_prev = tops[j - 1][1]
        f3 = _form_at(triple, b_j, 2, policy)
        f3p = _form_at(triple, b_prev, 2, policy)
        psi_b = _psi_at_point(triple, f3, b_j, prec)
        psi_prev = _psi_at_point(triple, f3p, b_prev, prec)
        gate = psi_prev.sub(Interval.from_fraction(nu1, prec), prec)
        if not gate.hi < 0:
            report.add("psi3-top-bound", loc(b_j), "skipped",
                       "gate psi3(b_{j-1}) < nu1 not certified")
            continue
        b_iv = qpoint_interval(b_j, prec)
        bound = Interval.hull(psi_b, psi_prev).sub(slack.div(b_iv, prec), prec)
        worst = None
        for point in _points_between(triple, a_j, b_j, policy):
            val = _psi_at_point(triple, _form_at(triple, point, 2, policy),
                                point, prec)
            worst = val if worst is None else Interval.hull(worst, val)
        if worst is not None and worst.hi < bound.lo:
            report.add("psi3-top-bound", loc(b_j), "violation",
                       "psi3 falls below endpoint bound inside T_j")
        else:
            report.add("psi3-top-bound", loc(b_j), "pass")


def _points_between(triple, lo: QPoint, hi: QPoint, policy):
    pts = [lo]
    for seg in triple.segments:
        if compare_qpoints(seg.q_start, lo, policy) == Ordering.GREATER and \
                compare_qpoints(seg.q_start, hi, policy) == Ordering.LESS:
            pts.append(seg.q_start)
    pts.append(hi)
    return pts
