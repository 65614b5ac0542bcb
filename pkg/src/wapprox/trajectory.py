"""Event-driven construction of the exact minima trajectory.

Within a window [w0, w1] a certified candidate pool provably contains
every vector that can enter the three-minima envelope anywhere in the
window.  The envelope can then only change where two candidate lines
cross or where a candidate's own active term switches -- both are
crossings of exact log-affine forms.  Between consecutive crossings the
envelope is frozen: one certified ranking at an interior rational point
determines the witnesses and lines of the whole gap.  Breakpoints are
therefore exact objects (roots of forms), never approximations, and two
events are merged only when algebra proves them equal.

Window boundaries are dyadic rationals; a crossing of two distinct
lines at a positive rational q would force the lines to coincide, so
stitching windows never lands on a breakpoint.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .errors import OutOfRange, PrecisionExhausted, UndecidableComparison, WapproxError
from .forms import (AffineLogForm, FormRoot, QPoint, compare_qpoints, crossing,
                    form_zero_at, qpoint_interval, refine_qpoint, sign_at_once)
from .intervals import Interval, Ordering, PrecisionPolicy, mpfr_to_fraction
from .minima import (PoolTooLarge, _dominant_form, _enumerate_pool, _prune_pool,
                     _rank_of, successive_minima, vector_terms)
from .model import IntVec, ProblemInstance, require_independent


@dataclass
class TrajectorySegment:
    """One maximal piece on which all three minima follow fixed lines."""

    q_start: QPoint
    q_end: QPoint
    witnesses: tuple[IntVec, IntVec, IntVec]
    lines: tuple[AffineLogForm, AffineLogForm, AffineLogForm]

    @property
    def slopes(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(line.slope for line in self.lines)

    def values_at(self, point: QPoint, prec: int) -> tuple[Interval, ...]:
        return tuple(line.eval_qpoint(point, prec) for line in self.lines)


@dataclass
class MinimaTrajectory:
    instance: ProblemInstance
    segments: list[TrajectorySegment]
    q_min: Fraction
    q_max: Fraction

    def breakpoints(self) -> Iterator[QPoint]:
        for seg in self.segments:
            yield seg.q_start
        yield self.segments[-1].q_end

    def segment_at(self, q: Fraction, policy: Optional[PrecisionPolicy] = None
                   ) -> TrajectorySegment:
        policy = policy or self.instance.policy
        q = Fraction(q)
        if q < self.q_min or q > self.q_max:
            raise OutOfRange(f"q={q} outside [{self.q_min}, {self.q_max}]")
        lo, hi = 0, len(self.segments) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if compare_qpoints(q, self.segments[mid].q_end, policy) == Ordering.GREATER:
                lo = mid + 1
            else:
                hi = mid
        return self.segments[lo]

    def evaluate(self, q: Fraction, prec: Optional[int] = None) -> tuple[Interval, ...]:
        """Certified (L1, L2, L3) at q by interpolation in the containing segment."""
        prec = prec or self.instance.policy.start_bits
        seg = self.segment_at(q)
        return tuple(line.eval_fraction(Fraction(q), prec) for line in seg.lines)

    def validate(self, policy: Optional[PrecisionPolicy] = None) -> None:
        """Assert tiling, slope alphabet, continuity and slope monotonicity."""
        policy = policy or self.instance.policy
        slopes_ok = set(self.instance.weights.slopes)
        prev = None
        witness_slope: dict[IntVec, Fraction] = {}
        for seg in self.segments:
            for s in seg.slopes:
                if s not in slopes_ok:
                    raise WapproxError(f"slope {s} outside alphabet")
            if prev is not None:
                if seg.q_start is not prev.q_end and \
                        compare_qpoints(seg.q_start, prev.q_end, policy) != Ordering.EQUAL:
                    raise WapproxError("segments do not tile the window")
                for i in range(3):
                    diff = prev.lines[i].sub(seg.lines[i])
                    if not (diff.is_identically_zero()
                            or form_zero_at(diff, seg.q_start)):
                        raise WapproxError(f"discontinuity of L{i + 1} at a breakpoint")
                current = {seg.witnesses[i]: seg.slopes[i] for i in range(3)}
                for v, s in current.items():
                    if v in witness_slope and s < witness_slope[v]:
                        raise WapproxError(f"slope of witness {tuple(v)} decreased")
                witness_slope = current
            else:
                witness_slope = {seg.witnesses[i]: seg.slopes[i] for i in range(3)}
            prev = seg

    # -- reporting -----------------------------------------------------

    def recurrence_report(self, window: Fraction = Fraction(10),
                          threshold: float = 2.4) -> list[dict]:
        """Soft check: within sliding windows, the gaps L3-L2 and L2-L1
        should each dip below the threshold (recurrence of near-equality).
        Reported, never asserted: the guarantee is only asymptotic."""
        prec = 64
        pts: list[tuple[float, float, float]] = []
        for seg in self.segments:
            iv = qpoint_interval(seg.q_start, prec)
            vals = seg.values_at(seg.q_start, prec)
            pts.append((float(iv.lo), float(vals[2].lo - vals[1].hi),
                        float(vals[1].lo - vals[0].hi)))
        end_iv = qpoint_interval(self.segments[-1].q_end, prec)
        vals = self.segments[-1].values_at(self.segments[-1].q_end, prec)
        pts.append((float(end_iv.lo), float(vals[2].lo - vals[1].hi),
                    float(vals[1].lo - vals[0].hi)))
        out = []
        start, w = float(self.q_min), float(window)
        while start < float(self.q_max) - w / 2:
            sel = [p for p in pts if start <= p[0] <= start + w]
            if sel:
                min32 = min(p[1] for p in sel)
                min21 = min(p[2] for p in sel)
                out.append({"window_start": start, "min_gap_32": min32,
                            "min_gap_21": min21,
                            "dips_32": min32 <= threshold,
                            "dips_21": min21 <= threshold})
            start += w / 2
        return out


def build_trajectory(inst: ProblemInstance, q_min: Fraction, q_max: Fraction,
                     policy: Optional[PrecisionPolicy] = None,
                     window: Fraction = Fraction(1),
                     dependence_height: int = 50) -> MinimaTrajectory:
    """Exact piecewise-linear trajectory of (L1, L2, L3) on [q_min, q_max]."""
    q_min, q_max = Fraction(q_min), Fraction(q_max)
    if not 0 <= q_min < q_max:
        raise OutOfRange("need 0 <= q_min < q_max")
    policy = policy or inst.policy
    require_independent(inst, dependence_height)

    segments: list[TrajectorySegment] = []
    q0 = q_min
    step = Fraction(window)
    while q0 < q_max:
        q1 = min(q0 + step, q_max)
        try:
            new_segs = _sweep_window(inst, q0, q1, policy)
        except PoolTooLarge:
            if step < Fraction(1, 64):
                raise
            step = step / 2
            continue
        _stitch(segments, new_segs, policy)
        q0 = q1
        if step < Fraction(window):
            step = min(step * 2, Fraction(window))
    traj = MinimaTrajectory(inst, segments, q_min, q_max)
    traj.validate(policy)
    return traj


def _stitch(segments: list[TrajectorySegment], new_segs: list[TrajectorySegment],
            policy: PrecisionPolicy) -> None:
    for seg in new_segs:
        if segments:
            last = segments[-1]
            if all(last.lines[i].same_line(seg.lines[i]) for i in range(3)):
                last.q_end = seg.q_end
                continue
        segments.append(seg)


def _sweep_window(inst, q0: Fraction, q1: Fraction,
                  policy: PrecisionPolicy) -> list[TrajectorySegment]:
    for prec in policy.ladder():
        try:
            return _sweep_at(inst, q0, q1, prec, policy)
        except UndecidableComparison:
            continue
    raise PrecisionExhausted(f"window [{q0}, {q1}] undecidable at max precision")


def _envelope_bound_form(inst, q0: Fraction, policy) -> AffineLogForm:
    """Exact form E with L3(q) <= E(q) for q >= q0 (slope bound on L3)."""
    sm = successive_minima(inst, q0, policy)
    top = mpfr_to_fraction(sm.L[2].hi) + Fraction(1, 1 << 16)
    nu2 = inst.weights.nu2
    return AffineLogForm(const=top - nu2 * q0, logs=(), slope=nu2)


_F_MARGIN = 1e-6    # float prefilter slack; floats come from outward-rounded
                    # interval endpoints, so +-margin keeps them conservative
_LEAF_CUTOFF = 64   # maximum pool size the exact all-pairs leaf prefers
_MIN_LEAF_WIDTH = Fraction(1, 16)  # below this, solve exactly regardless


class _WindowData:
    """Shared exact and float data for one sweep window."""

    def __init__(self, inst, pool, e_form, prec):
        import numpy as np

        self.inst = inst
        self.pool = pool
        self.e_form = e_form
        self.prec = prec
        line_index: dict[AffineLogForm, int] = {}
        self.lines: list[AffineLogForm] = []
        self.pool_terms: list[tuple[AffineLogForm, ...]] = []
        term_line: list[int] = []
        vec_starts: list[int] = []
        for v in pool:
            terms = vector_terms(inst, v)
            self.pool_terms.append(terms)
            vec_starts.append(len(term_line))
            for t in terms:
                idx = line_index.get(t)
                if idx is None:
                    idx = len(self.lines)
                    line_index[t] = idx
                    self.lines.append(t)
                term_line.append(idx)
        self.line_index = line_index
        ints = [ln.intercept_interval(prec) for ln in self.lines]
        self.int_lo = np.array([float(iv.lo) for iv in ints]) - _F_MARGIN
        self.int_hi = np.array([float(iv.hi) for iv in ints]) + _F_MARGIN
        self.slp = np.array([float(ln.slope) for ln in self.lines])
        self.term_line = np.array(term_line)
        self.vec_starts = np.array(vec_starts)

    def vec_bounds(self, q: Fraction):
        """Per-vector certified-conservative float bounds of L_v(q)."""
        import numpy as np

        qf = float(q)
        tl = self.int_lo[self.term_line] + self.slp[self.term_line] * qf
        th = self.int_hi[self.term_line] + self.slp[self.term_line] * qf
        return (np.maximum.reduceat(tl, self.vec_starts),
                np.maximum.reduceat(th, self.vec_starts))

    def candidates_at(self, q: Fraction) -> list[int]:
        """Indices of vectors possibly at or below the envelope bound at q."""
        lo, _ = self.vec_bounds(q)
        e_at = float(self.e_form.eval_fraction(q, self.prec).hi) + _F_MARGIN
        import numpy as np

        return [int(i) for i in np.flatnonzero(lo <= e_at)]

    def candidates_on(self, a: Fraction, b: Fraction) -> list[int]:
        """Indices possibly at or below the envelope anywhere on [a, b].

        For each term the window minimum sits at an endpoint, and
        ``min L_v >= max_t min_t``, so the test is a sound superset.
        """
        import numpy as np

        qfa, qfb = float(a), float(b)
        ta = self.int_lo[self.term_line] + self.slp[self.term_line] * qfa
        tb = self.int_lo[self.term_line] + self.slp[self.term_line] * qfb
        vec_min_lo = np.maximum.reduceat(np.minimum(ta, tb), self.vec_starts)
        e_hi = max(float(self.e_form.eval_fraction(a, self.prec).hi),
                   float(self.e_form.eval_fraction(b, self.prec).hi)) + _F_MARGIN
        return [int(i) for i in np.flatnonzero(vec_min_lo <= e_hi)]

    def rank_at(self, q: Fraction, policy) -> tuple:
        cached = getattr(self, "_rank_cache", None)
        if cached is None:
            cached = self._rank_cache = {}
        hit = cached.get(q)
        if hit is None:
            cand = [self.pool[i] for i in self.candidates_at(q)]
            hit = cached[q] = _rank_at(self.inst, cand, q, self.prec, self.e_form)
        return hit


def _sweep_at(inst, q0: Fraction, q1: Fraction, prec: int,
              policy: PrecisionPolicy) -> list[TrajectorySegment]:
    e_form = _envelope_bound_form(inst, q0, policy)
    pool = _enumerate_pool(inst, q0, q1, e_form, prec)
    pool = _prune_pool(inst, pool, q0, q1, e_form, prec)
    data = _WindowData(inst, pool, e_form, prec)
    segments: list[TrajectorySegment] = []
    _resolve(data, q0, q1, policy, segments, 0)
    return segments


def _no_event_certificate(data: _WindowData, a: Fraction, b: Fraction,
                          seg_lines, witnesses) -> bool:
    """True when provably no envelope change occurs on [a, b]:

    (i) the three active lines do not cross each other inside,
    (ii) no witness's inactive term overtakes its active line,
    (iii) no other pool vector crosses line 1, line 2, or line 3.
    For (iii), staying strictly above or strictly below a line is decided
    per vector from certified-conservative float bounds (all differences
    are affine in q, so endpoint signs decide); exceptions are vectors
    riding an identical line (no event) and, for line 3 only, vectors in
    the span of the first two witnesses (rank 3 requires independence,
    so their crossings of line 3 cannot be a first event).
    """
    import numpy as np

    prec = data.prec
    for i in range(3):
        for j in range(i + 1, 3):
            d = seg_lines[i].sub(seg_lines[j])
            if d.slope == 0:
                continue
            da = d.eval_fraction(a, prec)
            db = d.eval_fraction(b, prec)
            if not ((da.hi < 0 and db.hi < 0) or (da.lo > 0 and db.lo > 0)):
                return False
    for w, ln in zip(witnesses, seg_lines):
        for t in vector_terms(data.inst, w):
            if t == ln:
                continue
            d = t.sub(ln)
            if d.slope == 0:
                continue
            da = d.eval_fraction(a, prec)
            db = d.eval_fraction(b, prec)
            if not (da.hi < 0 and db.hi < 0):
                return False

    qfa, qfb = float(a), float(b)
    ta_lo = data.int_lo[data.term_line] + data.slp[data.term_line] * qfa
    tb_lo = data.int_lo[data.term_line] + data.slp[data.term_line] * qfb
    ta_hi = data.int_hi[data.term_line] + data.slp[data.term_line] * qfa
    tb_hi = data.int_hi[data.term_line] + data.slp[data.term_line] * qfb
    witness_set = set(witnesses)
    w1, w2 = witnesses[0], witnesses[1]

    suspects: set[int] = set()
    for k, ln in enumerate(seg_lines):
        ln_a = ln.eval_fraction(a, prec)
        ln_b = ln.eval_fraction(b, prec)
        la_hi, lb_hi = float(ln_a.hi) + _F_MARGIN, float(ln_b.hi) + _F_MARGIN
        la_lo, lb_lo = float(ln_a.lo) - _F_MARGIN, float(ln_b.lo) - _F_MARGIN
        term_above = (ta_lo > la_hi) & (tb_lo > lb_hi)
        term_below = (ta_hi < la_lo) & (tb_hi < lb_lo)
        vec_above = np.maximum.reduceat(
            term_above.astype(np.int8), data.vec_starts) > 0
        vec_below = np.minimum.reduceat(
            term_below.astype(np.int8), data.vec_starts) > 0
        ok = vec_above if k == 0 else (vec_above | vec_below)
        suspects.update(int(i) for i in np.flatnonzero(~ok))

    for vi in suspects:
        v = data.pool[vi]
        if v in witness_set:
            continue
        if not _vector_clear_of_lines(data, vi, a, b, seg_lines, w1, w2):
            return False
    return True


def _vector_clear_of_lines(data: _WindowData, vi: int, a: Fraction, b: Fraction,
                           seg_lines, w1: IntVec, w2: IntVec) -> bool:
    """Exact fallback of certificate part (iii) for one suspect vector."""
    prec = data.prec
    v = data.pool[vi]
    terms = data.pool_terms[vi]
    for k, ln in enumerate(seg_lines):
        # rider: max term is the very same line, others strictly below it
        rider = False
        for t in terms:
            if t == ln or (t.slope == ln.slope and t.same_line(ln)):
                others = [s for s in terms if s is not t]
                if all(s.sub(ln).eval_fraction(a, prec).hi < 0 and
                       s.sub(ln).eval_fraction(b, prec).hi < 0 for s in others):
                    rider = True
                break
        if rider:
            continue
        if k == 2 and _rank_of([w1, w2, v]) == 2:
            continue  # dependent on the leading pair: cannot be a rank-3 event
        above = any(t.sub(ln).eval_fraction(a, prec).lo > 0 and
                    t.sub(ln).eval_fraction(b, prec).lo > 0 for t in terms)
        if above:
            continue
        if k > 0:
            below = all(t.sub(ln).eval_fraction(a, prec).hi < 0 and
                        t.sub(ln).eval_fraction(b, prec).hi < 0 for t in terms)
            if below:
                continue
        return False
    return True


def _resolve(data: _WindowData, a: Fraction, b: Fraction,
             policy: PrecisionPolicy, out: list[TrajectorySegment],
             depth: int) -> None:
    """Adaptive bisection: certify event-free spans, isolate the rest."""
    wa, la = data.rank_at(a, policy)
    wb, lb = data.rank_at(b, policy)
    if all(la[i] == lb[i] or la[i].same_line(lb[i]) for i in range(3)) and \
            _no_event_certificate(data, a, b, la, wa):
        _append_segment(out, a, b, wa, la)
        return
    relevant = data.candidates_on(a, b)
    if len(relevant) <= _LEAF_CUTOFF or (b - a) <= _MIN_LEAF_WIDTH:
        for seg in _allpairs_segments(data, relevant, a, b, policy):
            _append_segment(out, seg.q_start, seg.q_end, seg.witnesses, seg.lines)
        return
    mid = (a + b) / 2
    _resolve(data, a, mid, policy, out, depth + 1)
    _resolve(data, mid, b, policy, out, depth + 1)


def _append_segment(out: list[TrajectorySegment], q_start, q_end,
                    witnesses, lines) -> None:
    if out and all(out[-1].lines[i] == lines[i] or
                   out[-1].lines[i].same_line(lines[i]) for i in range(3)):
        out[-1].q_end = q_end
    else:
        out.append(TrajectorySegment(q_start=q_start, q_end=q_end,
                                     witnesses=witnesses, lines=lines))


def _allpairs_segments(data: _WindowData, indices: list[int], q0: Fraction,
                       q1: Fraction, policy: PrecisionPolicy
                       ) -> list[TrajectorySegment]:
    """Exact event solver over [q0, q1] for the given pool indices.

    The indices must cover every vector that can touch the envelope on
    the span; events are crossings of their lines, prefiltered with the
    window's certified-conservative float snapshots.
    """
    import numpy as np

    prec, e_form = data.prec, data.e_form
    sub_lines: list[int] = sorted({int(li) for vi in indices
                                   for li in data.term_line[
                                       data.vec_starts[vi]:
                                       data.vec_starts[vi] + len(data.pool_terms[vi])]})
    owners: dict[int, list[tuple[AffineLogForm, ...]]] = {li: [] for li in sub_lines}
    for vi in indices:
        terms = data.pool_terms[vi]
        base = data.vec_starts[vi]
        for off, t in enumerate(terms):
            owners[int(data.term_line[base + off])].append(terms)

    def can_be_active(li: int, iv: Interval, val: Interval) -> bool:
        for terms in owners[li]:
            if all(t.eval_interval(iv, prec).lo <= val.hi for t in terms):
                return True
        return False

    qf0, qf1 = float(q0), float(q1)
    ids = np.array(sub_lines)
    lo0 = data.int_lo[ids] + data.slp[ids] * qf0
    hi0 = data.int_hi[ids] + data.slp[ids] * qf0
    lo1 = data.int_lo[ids] + data.slp[ids] * qf1
    hi1 = data.int_hi[ids] + data.slp[ids] * qf1
    e_hi = max(float(e_form.eval_fraction(q0, prec).hi),
               float(e_form.eval_fraction(q1, prec).hi)) + _F_MARGIN
    vmin = np.minimum(lo0, lo1)
    vmax = np.maximum(hi0, hi1)
    slp = data.slp[ids]

    # every envelope event happens at the value of L1, L2 or L3 there:
    # a crossing strictly between two minima levels pairs vectors that
    # are mutually dependent and cannot change the envelope.  Slope
    # bounds (-1 and nu2) confine each level to a narrow band.
    _, la = data.rank_at(q0, policy)
    _, lb = data.rank_at(q1, policy)
    width = qf1 - qf0
    nu2f = float(data.inst.weights.nu2)
    band_lo, band_hi = [], []
    for k in range(3):
        ka = la[k].eval_fraction(q0, prec)
        kb = lb[k].eval_fraction(q1, prec)
        band_lo.append(max(float(ka.lo) - width, float(kb.lo) - nu2f * width)
                       - _F_MARGIN)
        band_hi.append(min(float(ka.hi) + nu2f * width, float(kb.hi) + width)
                       + _F_MARGIN)

    events: list[QPoint] = []
    q0_iv = Interval.from_fraction(q0, prec)
    q1_iv = Interval.from_fraction(q1, prec)
    n = len(sub_lines)
    for i in range(n):
        js = np.arange(i + 1, n)
        if js.size == 0:
            continue
        mask = slp[js] != slp[i]
        mask &= ~((lo0[js] > hi0[i]) & (lo1[js] > hi1[i]))
        mask &= ~((hi0[js] < lo0[i]) & (hi1[js] < lo1[i]))
        mask &= np.maximum(vmin[js], vmin[i]) <= e_hi
        pair_lo = np.maximum(vmin[js], vmin[i])
        pair_hi = np.minimum(vmax[js], vmax[i])
        in_band = np.zeros_like(mask)
        for k in range(3):
            in_band |= (pair_lo <= band_hi[k]) & (pair_hi >= band_lo[k])
        mask &= in_band
        line_i = data.lines[sub_lines[i]]
        for j in js[mask]:
            line_j = data.lines[sub_lines[int(j)]]
            if line_i.slope == line_j.slope:
                continue
            c = crossing(line_i, line_j)
            iv = c.refine(prec)
            if iv.hi < q0_iv.lo or iv.lo > q1_iv.hi:
                continue
            val = line_i.eval_interval(iv, prec)
            bound = e_form.eval_interval(iv, prec)
            if val.lo > bound.hi:
                continue
            if not (can_be_active(sub_lines[i], iv, val)
                    and can_be_active(sub_lines[int(j)], iv, val)):
                continue
            if compare_qpoints(c, q0, policy) == Ordering.GREATER and \
                    compare_qpoints(c, q1, policy) == Ordering.LESS:
                events.append(c)

    events.sort(key=functools.cmp_to_key(
        lambda x, y: compare_qpoints(x, y, policy).value))
    distinct: list[QPoint] = []
    for e in events:
        if not distinct or compare_qpoints(distinct[-1], e, policy) != Ordering.EQUAL:
            distinct.append(e)

    cuts: list[QPoint] = [q0] + distinct + [q1]
    segments: list[TrajectorySegment] = []
    prev_rank = None
    for k in range(len(cuts) - 1):
        q_eval = _interior_rational(cuts[k], cuts[k + 1], policy)
        if prev_rank is not None and _rank_still_valid(data, q_eval, *prev_rank):
            witnesses, seg_lines = prev_rank
        else:
            witnesses, seg_lines = data.rank_at(q_eval, policy)
            prev_rank = (witnesses, seg_lines)
        if segments and all(segments[-1].lines[i] == seg_lines[i] or
                            segments[-1].lines[i].same_line(seg_lines[i])
                            for i in range(3)):
            segments[-1].q_end = cuts[k + 1]
        else:
            segments.append(TrajectorySegment(
                q_start=cuts[k], q_end=cuts[k + 1],
                witnesses=witnesses, lines=seg_lines))
    return segments


def _rank_still_valid(data: _WindowData, q: Fraction, witnesses, lines) -> bool:
    """Certified check that a previous gap's ranking holds at q as well.

    Cheap path for the event-dense stretches near approximation spikes:
    the order of the three lines is re-certified, each witness's line is
    still its max term, and every pool vector that could dip below a
    line is dismissed either by linear dependence (integer determinant)
    or by a certified per-term comparison.
    """
    import numpy as np

    prec = data.prec
    line_ivs = [ln.eval_fraction(q, prec) for ln in lines]
    for i in range(2):
        if not (line_ivs[i].hi < line_ivs[i + 1].lo
                or lines[i].slope == lines[i + 1].slope
                and lines[i].same_line(lines[i + 1])):
            return False
    for w, ln, ln_iv in zip(witnesses, lines, line_ivs):
        for t in vector_terms(data.inst, w):
            if t == ln:
                continue
            t_iv = t.eval_fraction(q, prec)
            if not t_iv.hi < ln_iv.lo:
                return False
    lo, _ = data.vec_bounds(q)
    w1, w2 = witnesses[0], witnesses[1]
    witness_set = set(witnesses)
    for k in range(3):
        lk_hi = float(line_ivs[k].hi) + _F_MARGIN
        for vi in np.flatnonzero(lo < lk_hi):
            v = data.pool[int(vi)]
            if v in witness_set:
                continue
            if k >= 1 and _rank_of([w1, v]) == 1:
                continue  # parallel to the first witness
            if k == 2 and _rank_of([w1, w2, v]) == 2:
                continue  # dependent on the leading pair
            # certified: some term of v stays at or above the line
            terms = data.pool_terms[int(vi)]
            if not any(t.eval_fraction(q, prec).lo >= line_ivs[k].hi
                       for t in terms):
                return False
    return True


def _rank_at(inst, pool: list[IntVec], q_eval: Fraction, prec: int,
             e_form: AffineLogForm | None = None):
    from .minima import _sorted_entries

    if e_form is not None:
        # witnesses satisfy L <= lambda3 <= E at q_eval; drop the rest
        bound_hi = e_form.eval_fraction(q_eval, prec).hi
        subset = []
        for v in pool:
            terms = vector_terms(inst, v)
            lo = max(t.eval_fraction(q_eval, prec).lo for t in terms)
            if lo <= bound_hi:
                subset.append(v)
        pool = subset
    entries = _sorted_entries(inst, pool, q_eval, prec)
    chosen: list[tuple[IntVec, AffineLogForm]] = []
    for v, form, _ in entries:
        if _rank_of([w for w, _ in chosen] + [v]) == len(chosen) + 1:
            chosen.append((v, form))
            if len(chosen) == 3:
                break
    if len(chosen) < 3:
        raise RuntimeError("window pool lost an independent triple (internal bug)")
    return (tuple(v for v, _ in chosen), tuple(f for _, f in chosen))


def _interior_rational(a: QPoint, b: QPoint, policy: PrecisionPolicy) -> Fraction:
    """A rational strictly between two distinct breakpoints."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (a + b) / 2
    for prec in policy.ladder():
        try:
            ia = qpoint_interval(a, prec)
            ib = qpoint_interval(b, prec)
        except UndecidableComparison:
            continue
        if ia.hi < ib.lo:
            return (mpfr_to_fraction(ia.hi) + mpfr_to_fraction(ib.lo)) / 2
    raise PrecisionExhausted("could not separate adjacent breakpoints")


def evaluate(traj: MinimaTrajectory, q: Fraction,
             prec: Optional[int] = None) -> tuple[Interval, ...]:
    """Module-level alias of :meth:`MinimaTrajectory.evaluate`."""
    return traj.evaluate(q, prec)


# -- serialization -----------------------------------------------------------


def _decimal_of_fraction(fr: Fraction, sig: int) -> str:
    from decimal import Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = sig
        return str(Decimal(fr.numerator) / Decimal(fr.denominator))


def render_qpoint(point: QPoint, policy: PrecisionPolicy, sig: int = 30) -> str:
    """Decimal rendering of a breakpoint, certified beyond the digit count."""
    bits = int((sig + 5) * 3.33) + 4
    iv = refine_qpoint(point, policy, bits) if isinstance(point, FormRoot) \
        else Interval.from_fraction(point, bits)
    return _decimal_of_fraction(iv.midpoint_fraction(), sig)


def render_interval(iv: Interval, sig: int = 30) -> str:
    return _decimal_of_fraction(iv.midpoint_fraction(), sig)


def trajectory_to_json(traj: MinimaTrajectory, sig: int = 30) -> str:
    policy = traj.instance.policy
    prec = max(policy.start_bits, int((sig + 5) * 3.33) + 8)
    segs = []
    for seg in traj.segments:
        vals = seg.values_at(seg.q_start, prec)
        segs.append({
            "q_start": render_qpoint(seg.q_start, policy, sig),
            "q_end": render_qpoint(seg.q_end, policy, sig),
            "values_at_start": [render_interval(v, sig) for v in vals],
            "slopes": [str(s) for s in seg.slopes],
            "witnesses": [[v.x, v.y1, v.y2] for v in seg.witnesses],
        })
    doc = {
        "targets": [traj.instance.targets.xi1.text, traj.instance.targets.xi2.text],
        "weights": [str(traj.instance.weights.nu1), str(traj.instance.weights.nu2)],
        "q_min": str(traj.q_min),
        "q_max": str(traj.q_max),
        "segments": segs,
    }
    return json.dumps(doc, indent=2)
