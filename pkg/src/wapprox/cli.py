"""Batch front end: one JSON config in, CSV/JSON artifacts out.

Subcommands: ``trajectory``, ``analyze``, ``jarnik``, ``oracle``.  All
numeric output renders certified interval midpoints at 30 significant
digits (enclosures are refined below the rendering precision first), so
identical configs produce byte-identical files.

Exit codes: 0 success (including an "inapplicable" verdict), 2 bad
config, 3 dependent targets, 4 precision exhausted, 5 failed verdict,
6 window too short, 7 oracle cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import analysis, jarnik
from .errors import (CapExceeded, ConfigError, DependentTargets,
                     PrecisionExhausted, WindowTooShort)
from .intervals import PrecisionPolicy
from .minima import successive_minima
from .model import IntVec, ProblemInstance, dependence_check, make_instance
from .oracle import OracleConfig, brute_minima
from .trajectory import (MinimaTrajectory, build_trajectory, render_interval,
                         render_qpoint, trajectory_to_json)

_SIG = 30

EXIT_CONFIG = 2
EXIT_DEPENDENT = 3
EXIT_PRECISION = 4
EXIT_FAIL = 5
EXIT_WINDOW = 6
EXIT_CAP = 7


@dataclass
class RunConfig:
    xi1: str
    xi2: str
    weights: tuple[str, str]
    q_min: str = "0"
    q_max: str = "20"
    precision: dict = field(default_factory=dict)
    c_const: Optional[str] = None
    C_const: Optional[str] = None
    sample_count: int = 200
    dependence_height: int = 50
    window: str = "1"
    audit_q_floor: str = "0"
    oracle: dict = field(default_factory=dict)
    out_csv: str = "trajectory.csv"
    out_json: str = "trajectory.json"
    out_report: str = "report.json"

    @staticmethod
    def load(path: str) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        known = {f for f in RunConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = RunConfig(**doc)
            cfg.weights = tuple(cfg.weights)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        return cfg

    def policy(self) -> PrecisionPolicy:
        p = self.precision
        try:
            return PrecisionPolicy(
                start_bits=int(p.get("start_bits", 192)),
                max_bits=int(p.get("max_bits", 4096)),
                escalation_factor=Fraction(str(p.get("escalation_factor", 2))))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad precision policy: {exc}") from exc

    def instance(self) -> ProblemInstance:
        try:
            nu1, nu2 = (Fraction(w) for w in self.weights)
            return make_instance(self.xi1, self.xi2, nu1, nu2, self.policy())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad instance: {exc}") from exc

    def q_range(self) -> tuple[Fraction, Fraction]:
        try:
            lo, hi = Fraction(self.q_min), Fraction(self.q_max)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad q range: {exc}") from exc
        if not lo < hi:
            raise ConfigError("need q_min < q_max")
        return lo, hi

    def thresholds(self):
        c = analysis.default_c() if self.c_const is None \
            else analysis._as_threshold(Fraction(self.c_const))
        C = analysis.default_C(c) if self.C_const is None \
            else analysis._as_threshold(Fraction(self.C_const))
        return c, C

    def oracle_config(self) -> OracleConfig:
        o = self.oracle
        return OracleConfig(
            q_max_oracle=Fraction(str(o.get("q_max_oracle", 10))),
            x_margin=int(o.get("x_margin", 2)),
            y_window=int(o.get("y_window", 2)))


def _build_pipeline(cfg: RunConfig):
    inst = cfg.instance()
    lo, hi = cfg.q_range()
    traj = build_trajectory(inst, lo, hi, window=Fraction(cfg.window),
                            dependence_height=cfg.dependence_height)
    return inst, traj


def _trajectory_csv(traj: MinimaTrajectory, sample_count: int) -> str:
    policy = traj.instance.policy
    prec = max(policy.start_bits, 128)
    rows = []

    def add_row(q_key: float, q_str: str, seg, q_point, with_psi: bool):
        ls = [ln.eval_qpoint(q_point, prec) for ln in seg.lines]
        mean = ls[0].add(ls[1], prec).add(ls[2], prec).mul_fraction(
            Fraction(1, 3), prec)
        ps = [l.sub(mean, prec) for l in ls]
        cells = [q_str]
        cells += [render_interval(iv, _SIG) for iv in ls]
        cells += [render_interval(iv, _SIG) for iv in ps]
        if with_psi:
            from .forms import qpoint_interval
            q_iv = qpoint_interval(q_point, prec)
            cells += [render_interval(p.div(q_iv, prec), _SIG) for p in ps]
        else:
            cells += ["", "", ""]
        cells += [f"{w.x}:{w.y1}:{w.y2}" for w in seg.witnesses]
        rows.append((q_key, q_str, ",".join(cells)))

    lo, hi = traj.q_min, traj.q_max
    for k in range(sample_count + 1):
        q = lo + (hi - lo) * k / sample_count
        seg = traj.segment_at(q)
        add_row(float(q), render_qpoint(q, policy, _SIG), seg, q, q > 0)
    for seg in traj.segments[1:]:
        point = seg.q_start
        from .forms import qpoint_interval
        key = float(qpoint_interval(point, 64).lo)
        add_row(key, render_qpoint(point, policy, _SIG), seg, point, True)

    rows.sort(key=lambda r: (r[0], r[1]))
    header = "q,L1,L2,L3,P1,P2,P3,psi1,psi2,psi3,w1,w2,w3"
    return "\n".join([header] + [r[2] for r in rows]) + "\n"


def cmd_trajectory(cfg: RunConfig, out: Optional[str]) -> int:
    inst, traj = _build_pipeline(cfg)
    csv_text = _trajectory_csv(traj, int(cfg.sample_count))
    json_text = trajectory_to_json(traj, _SIG)
    csv_path = Path(out) if out else Path(cfg.out_csv)
    csv_path.write_text(csv_text)
    Path(cfg.out_json).write_text(json_text)
    faithful = inst.faithful_q_bound()
    if faithful is not None:
        print(f"note: series truncation faithful up to q ~ {float(faithful):.1f}",
              file=sys.stderr)
    dep = dependence_check(inst, cfg.dependence_height)
    print(f"dependence check: independent up to height {dep.height_bound}",
          file=sys.stderr)
    print(f"wrote {csv_path} and {cfg.out_json} "
          f"({len(traj.segments)} segments)", file=sys.stderr)
    return 0


def _point_str(point, policy) -> str:
    return render_qpoint(point, policy, _SIG)


def _annotation_doc(triple, ann, policy) -> dict:
    prec = policy.start_bits
    return {
        "degenerate": ann.degenerate_flag,
        "threshold_c": render_interval(
            ann.threshold_c.eval_fraction(Fraction(1), prec), _SIG),
        "threshold_C": render_interval(
            ann.threshold_C.eval_fraction(Fraction(1), prec), _SIG),
        "top_intervals": [[_point_str(a, policy), _point_str(b, policy)]
                          for a, b in ann.top_intervals],
        "bottom_intervals": [[_point_str(a, policy), _point_str(b, policy)]
                             for a, b in ann.bottom_intervals],
        "top_types": ann.top_types,
        "bottom_types": ann.bottom_types,
        "switch_points": [None if r is None else _point_str(r, policy)
                          for r in ann.switch_points],
        "interval_pairs": ann.interval_pairs,
        "extremum_points_top": [_point_str(p, policy)
                                for p in ann.extremum_points_top],
        "extremum_points_bottom": [_point_str(p, policy)
                                   for p in ann.extremum_points_bottom],
        "notes": ann.notes,
    }


def _phi_doc(est) -> dict:
    return {
        "window": [str(est.window[0]), str(est.window[1])],
        "phi_upper": [render_interval(iv, _SIG) for iv in est.phi_upper],
        "phi_lower": [render_interval(iv, _SIG) for iv in est.phi_lower],
        "localized_phi3_lower": None if est.localized_phi3_lower is None
        else render_interval(est.localized_phi3_lower, _SIG),
        "localized_phi1_upper": None if est.localized_phi1_upper is None
        else render_interval(est.localized_phi1_upper, _SIG),
    }


def cmd_analyze(cfg: RunConfig, out: Optional[str],
                triple_json: Optional[str]) -> int:
    policy = cfg.policy()
    if triple_json is not None:
        triple = analysis.triple_from_json(Path(triple_json).read_text(), policy)
    else:
        _, traj = _build_pipeline(cfg)
        triple = analysis.normalize(traj)
    c, C = cfg.thresholds()
    ann = analysis.detect_structure(triple, c, C, policy)
    doc = {"annotation": _annotation_doc(triple, ann, policy)}
    if ann.degenerate_flag:
        est = analysis.estimate_phi(triple, ann, policy)
        doc["phi"] = _phi_doc(est)
        doc["audit"] = None
    else:
        est = analysis.estimate_phi(triple, ann, policy)
        doc["phi"] = _phi_doc(est)
        report = analysis.monotonicity_audit(
            triple, ann, policy, q_floor=Fraction(cfg.audit_q_floor))
        doc["audit"] = report.to_dict()
    text = json.dumps(doc, indent=2) + "\n"
    Path(out or cfg.out_report).write_text(text)
    print(f"wrote {out or cfg.out_report}", file=sys.stderr)
    return 0


def cmd_jarnik(cfg: RunConfig, out: Optional[str]) -> int:
    policy = cfg.policy()
    _, traj = _build_pipeline(cfg)
    triple = analysis.normalize(traj)
    c, C = cfg.thresholds()
    ann = analysis.detect_structure(triple, c, C, policy)
    est = analysis.estimate_phi(triple, ann, policy)
    report = jarnik.check_theorem(triple, ann, est, policy)
    sym = jarnik.symmetric_form(report)
    doc = {
        "verdict": report.verdict,
        "hypothesis_ok": report.hypothesis_ok,
        "hypothesis_strict": report.hypothesis_strict,
        "weights": [str(report.weights[0]), str(report.weights[1])],
        "window": [str(report.window[0]), str(report.window[1])],
        "lhs": render_interval(report.lhs, _SIG),
        "mid": render_interval(report.mid, _SIG),
        "rhs": render_interval(report.rhs, _SIG),
        "tol": render_interval(report.tol, _SIG),
        "symmetric_lhs": render_interval(sym[0], _SIG),
        "symmetric_rhs": render_interval(sym[1], _SIG),
        "phi1_upper": render_interval(report.phi1_upper, _SIG),
        "phi3_lower": render_interval(report.phi3_lower, _SIG),
        "phi3_upper": render_interval(report.phi3_upper, _SIG),
        "classical_identity_residual":
            None if report.classical_identity_residual is None
            else render_interval(report.classical_identity_residual, _SIG),
        "residuals_36": [
            {"index": r.index,
             "b": render_interval(r.b_value, _SIG),
             "residual": render_interval(r.residual, _SIG),
             "residual_times_b": render_interval(
                 r.residual.mul(r.b_value, report.prec), _SIG),
             "nu_effective": render_interval(r.nu_effective, _SIG),
             "averaged": r.averaged}
            for r in report.residuals_36],
        "annotation": _annotation_doc(triple, ann, policy),
        "phi": _phi_doc(est),
    }
    text = json.dumps(doc, indent=2) + "\n"
    Path(out or cfg.out_report).write_text(text)
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return 0 if report.verdict in ("pass", "inapplicable") else EXIT_FAIL


def cmd_oracle(cfg: RunConfig, out: Optional[str], q_str: str,
               compare: bool) -> int:
    try:
        q = Fraction(q_str)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad --q value: {exc}") from exc
    inst = cfg.instance()
    ocfg = cfg.oracle_config()
    res = brute_minima(inst, q, ocfg)
    doc = {
        "q": str(q),
        "L": [render_interval(iv, _SIG) for iv in res.L],
        "witnesses": [[v.x, v.y1, v.y2] for v in res.witnesses],
    }
    if compare:
        eng = successive_minima(inst, q)
        exact_agree = all(res.forms[i].sub(eng.forms[i]).is_identically_zero()
                          for i in range(3))
        doc["engine_L"] = [render_interval(iv, _SIG) for iv in eng.L]
        doc["engine_witnesses"] = [[v.x, v.y1, v.y2] for v in eng.witnesses]
        doc["agree"] = bool(exact_agree)
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wapprox",
        description="weighted two-target simultaneous approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("trajectory", "analyze", "jarnik", "oracle"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        if name == "analyze":
            p.add_argument("--triple-json", default=None)
        if name == "oracle":
            p.add_argument("--q", required=True)
            p.add_argument("--compare", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = RunConfig.load(args.config)
        if args.command == "trajectory":
            return cmd_trajectory(cfg, args.out)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.out, args.triple_json)
        if args.command == "jarnik":
            return cmd_jarnik(cfg, args.out)
        return cmd_oracle(cfg, args.out, args.q, args.compare)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DependentTargets as exc:
        print(f"dependent targets: {exc}", file=sys.stderr)
        return EXIT_DEPENDENT
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except WindowTooShort as exc:
        print(f"window too short: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except CapExceeded as exc:
        print(f"oracle cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
