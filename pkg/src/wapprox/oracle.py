"""Brute-force successive minima, independent of the reduced-basis engine.

The oracle enumerates integer vectors directly from the definition: all
``|x|`` up to the dilation bound, all ``y_i`` in a window around
``round(xi_i * x)``, plus the pure vectors ``(0, +-1, 0)`` and
``(0, 0, +-1)``.  A vectorized floating-point sweep discards everything
that is provably far above the third minimum (the discard margin
dominates the worst-case float error by a wide, computed factor); the
surviving shortlist is then re-evaluated and ranked with the same
certified arithmetic the rest of the package uses.  No basis reduction,
no quotient tricks: candidate generation shares nothing with the
optimized engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import CapExceeded, OutOfRange, PrecisionExhausted, UndecidableComparison
from .exactnum import ex_interval
from .minima import MinimaAtQ, _rank_of, _sorted_entries
from .model import IntVec, ProblemInstance


@dataclass(frozen=True)
class OracleConfig:
    """Knobs of the brute-force sweep; results must be invariant under
    increases of ``x_margin`` and ``y_window`` (saturation)."""

    q_max_oracle: Fraction = Fraction(10)
    x_margin: int = 2
    y_window: int = 2

    def __post_init__(self):
        if self.y_window < 2:
            raise ValueError("y_window must be >= 2")
        if self.x_margin < 0:
            raise ValueError("x_margin must be >= 0")


def _float_candidates(inst: ProblemInstance, q: Fraction, cap: float,
                      cfg: OracleConfig):
    """All vectors with float-lambda below cap (+ margin), and the margin."""
    qf = float(q)
    s0, s1, s2 = math.exp(-qf), math.exp(float(inst.weights.nu1) * qf), \
        math.exp(float(inst.weights.nu2) * qf)
    xi1f = float(ex_interval(inst.xi1, 64).lo)
    xi2f = float(ex_interval(inst.xi2, 64).lo)
    x_hi = math.ceil(math.exp(qf) * cap) + cfg.x_margin
    yw = max(cfg.y_window, math.ceil(cap) + 1)
    margin = max(1e-6, (x_hi * 2.0 ** -48) * max(s1, s2, 1.0))

    xs = np.arange(-x_hi, x_hi + 1, dtype=np.int64)
    xf = xs.astype(np.float64)
    t0 = np.abs(xf) * s0
    r1, r2 = xi1f * xf, xi2f * xf
    y1b, y2b = np.rint(r1), np.rint(r2)
    found_v: list[np.ndarray] = []
    found_lam: list[np.ndarray] = []
    thresh = cap + margin
    for dy1 in range(-yw, yw + 1):
        y1 = y1b + dy1
        l1 = np.abs(r1 - y1) * s1
        for dy2 in range(-yw, yw + 1):
            y2 = y2b + dy2
            lam = np.maximum(t0, np.maximum(l1, np.abs(r2 - y2) * s2))
            mask = lam <= thresh
            if mask.any():
                found_v.append(np.stack(
                    [xs[mask], y1[mask].astype(np.int64),
                     y2[mask].astype(np.int64)], axis=1))
                found_lam.append(lam[mask])
    if not found_v:
        return np.zeros((0, 3), dtype=np.int64), np.zeros(0), margin
    return np.concatenate(found_v), np.concatenate(found_lam), margin


def brute_minima(inst: ProblemInstance, q: Fraction,
                 cfg: Optional[OracleConfig] = None) -> MinimaAtQ:
    """Definitional successive minima at ``q`` (subject to the oracle cap).

    Proceeds by doubling a dilation cap until the box holds three
    independent vectors, then keeps every vector within a safety margin
    of the float third minimum and ranks that shortlist exactly.
    """
    cfg = cfg or OracleConfig()
    q = Fraction(q)
    if q < 0:
        raise OutOfRange("q must be nonnegative")
    if q > cfg.q_max_oracle:
        raise CapExceeded(f"oracle capped at q <= {cfg.q_max_oracle}")

    cap = 1.0
    shortlist: list[IntVec] = []
    for _ in range(64):
        vecs, lams, margin = _float_candidates(inst, q, cap, cfg)
        order = np.argsort(lams, kind="stable")
        greedy: list[IntVec] = []
        lam3 = None
        for idx in order:
            v = IntVec(*(int(c) for c in vecs[idx]))
            if v.is_zero():
                continue
            if _rank_of(greedy + [v]) == len(greedy) + 1:
                greedy.append(v)
                if len(greedy) == 3:
                    lam3 = float(lams[idx])
                    break
        if lam3 is not None and lam3 + margin <= cap:
            keep = lams <= lam3 + margin
            seen: dict[IntVec, None] = {}
            for row in vecs[keep]:
                v = IntVec(*(int(c) for c in row)).canonical()
                if not v.is_zero():
                    seen[v] = None
            shortlist = list(seen.keys())
            break
        cap *= 2.0
    else:
        raise RuntimeError("oracle cap doubling did not stabilize")

    policy = inst.policy
    for prec in policy.ladder():
        try:
            return _exact_rank(inst, q, shortlist, prec)
        except UndecidableComparison:
            continue
    raise PrecisionExhausted("oracle shortlist ranking undecidable")


def _exact_rank(inst: ProblemInstance, q: Fraction, shortlist: list[IntVec],
                prec: int) -> MinimaAtQ:
    entries = _sorted_entries(inst, shortlist, q, prec)
    chosen: list[tuple[IntVec, object]] = []
    for v, form, _ in entries:
        if _rank_of([w for w, _ in chosen] + [v]) == len(chosen) + 1:
            chosen.append((v, form))
            if len(chosen) == 3:
                break
    if len(chosen) < 3:
        raise RuntimeError("oracle shortlist lost independence (internal bug)")
    witnesses = tuple(v for v, _ in chosen)
    forms = tuple(f for _, f in chosen)
    ls = tuple(f.eval_fraction(q, prec) for f in forms)
    return MinimaAtQ(q=q, L=ls, witnesses=witnesses, forms=forms)
