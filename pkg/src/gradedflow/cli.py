"""Command-line entry point.

Exit codes: 0 success (or a check that holds), 1 failure (a check that fails
or an error), 2 indeterminate numeric verdict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import expr as E
from .config import DEFAULT
from .errors import DegreeError, GradedFlowError
from .flow_nonzero import flow_nonzero, flow_odd
from .flow_zero import solve_pivotal
from .graded import GradedSignature, enumerate_multiindices, parse_graded
from .problem import load
from .vectorfield import VectorField, bracket
from .verify import (
    FAILS,
    HOLDS,
    INDETERMINATE,
    check_commuting_flows,
    check_flow_axioms,
    check_invariance,
    check_related_equivariance,
)

EXIT = {HOLDS: 0, FAILS: 1, INDETERMINATE: 2}


# ---------------------------------------------------------------------------
# output


def _json(obj):
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return _float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float(x):
    s = "%.17g" % x
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _index(sig, p):
    return {n: int(a) for n, a in zip(sig.graded, p)}


def _function_json(f):
    return [
        {"multiindex": _index(f.sig, p), "coefficient_expression": E.to_string(f.terms[p])}
        for p in sorted(f.terms)
    ]


def _field_json(X):
    return {
        "degree": X.degree,
        "components": {n: X.components[n].to_string() for n in X.sig.names},
    }


def _point(text, sig):
    vals = [float(v) for v in text.split(",")] if text else []
    if len(vals) != sig.n0:
        raise ValueError(f"--point needs {sig.n0} comma-separated value(s), got {len(vals)}")
    return vals


# ---------------------------------------------------------------------------
# subcommands


def cmd_bracket(args, out):
    spec = load(args.problem)
    X, Y = spec.field(args.X), spec.field(args.Y)
    out.write(_json(_field_json(bracket(X, Y))) + "\n")
    return 0


def cmd_flow(args, out):
    spec = load(args.problem)
    cfg = spec.config
    X = spec.field(args.field)
    if args.odd:
        flow = flow_odd(X, config=cfg)
    elif args.degree0 or X.degree == 0:
        if X.degree != 0:
            raise DegreeError(f"--degree0 needs a degree-0 field, {args.field} has degree {X.degree}")
        return _flow_degree0(args, X, cfg, out)
    else:
        flow = flow_nonzero(X, cfg)
    out.write(_json(flow.to_json()) + "\n")
    return 0


def _flow_degree0(args, X, cfg, out):
    x0 = _point(args.point, X.sig) if args.point is not None else [1.0] * X.sig.n0
    t = args.t
    span = (min(0.0, t), max(0.0, t)) if t else (-cfg.t_max, cfg.t_max)
    fj = solve_pivotal(X, x0, span, cfg)
    if args.grid:
        ts, ys = fj.grid()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + fj.labels())
        for ti, yi in zip(ts, ys):
            w.writerow([_float(ti)] + [_float(v) for v in yi])
        out.write(buf.getvalue())
        return 0
    jets = fj.jets(t)
    rows = []
    for name in X.sig.names:
        for p, v in fj.alg.at_base(jets[name]).items():
            rows.append({"coordinate": name, "multiindex": _index(X.sig, p), "value": v})
    out.write(_json(rows) + "\n")
    return 0


def cmd_pullback(args, out):
    spec = load(args.problem)
    phi = spec.map(args.map)
    f = parse_graded(phi.target, args.function, spec.config.weight_cap, where="--function")
    g = phi.pullback(f)
    out.write(_json({"degree": g.degree, "terms": _function_json(g)}) + "\n")
    return 0


def cmd_verify(args, out):
    spec = load(args.problem)
    cfg = spec.config
    changes = {}
    if args.samples is not None:
        changes["samples"] = args.samples
    if args.seed is not None:
        changes["seed"] = args.seed
    cfg = cfg.replace(**changes)
    names = args.field or []
    need = {"axioms": 1, "invariance": 2, "commuting": 2, "related": 2}[args.check]
    if len(names) != need:
        raise ValueError(f"--check {args.check} needs {need} --field argument(s), got {len(names)}")
    fields = [spec.field(n) for n in names]
    if args.check == "axioms":
        X = fields[0]
        if X.degree == 0:
            x0 = _point(args.point, X.sig) if args.point is not None else None
            pts = [x0] if x0 is not None else (list(cfg.base_points) or [[1.0] * X.sig.n0])
            reports = [check_flow_axioms(solve_pivotal(X, m, None, cfg.tight(), allow_partial=True), cfg) for m in pts]
            verdict = _combine([r.verdict() for r in reports])
            report = {"name": "axioms", "verdict": verdict, "points": [r.to_dict() for r in reports]}
        else:
            r = check_flow_axioms(flow_nonzero(X, cfg), cfg)
            verdict = r.verdict()
            report = {"name": "axioms", **r.to_dict()}
    elif args.check == "invariance":
        r = check_invariance(fields[0], fields[1], cfg)
        verdict, report = r.check.verdict, {"name": "invariance", **r.to_dict()}
    elif args.check == "commuting":
        r = check_commuting_flows(fields[0], fields[1], cfg)
        verdict, report = r.check.verdict, {"name": "commuting", **r.to_dict()}
    else:
        if args.map is None:
            raise ValueError("--check related needs --map")
        r = check_related_equivariance(spec.map(args.map), fields[0], fields[1], cfg)
        verdict, report = r.check.verdict, {"name": "related", **r.to_dict()}
    if args.json:
        out.write(_json(report) + "\n")
    else:
        out.write(f"{args.check}: {verdict}\n")
    return EXIT[verdict]


def _combine(verdicts):
    if FAILS in verdicts:
        return FAILS
    if INDETERMINATE in verdicts:
        return INDETERMINATE
    return HOLDS


def euler_demo(t, config=DEFAULT):
    """Max coefficient deviation of the numeric Euler flow from exp(t|f|)·f at x₀ = 1."""
    sig = GradedSignature([("x", 0), ("xi1", 1), ("xi2", 1), ("z", 2)])
    X = VectorField.euler(sig, config.weight_cap)
    span = (min(-1.0, -abs(t)), max(1.0, abs(t)))
    fj = solve_pivotal(X, [1.0], span, config)
    jets = fj.jets(t)
    worst = 0.0
    for c in sig.coords:
        got = fj.alg.at_base(jets[c.name])
        for p in enumerate_multiindices(sig, c.degree, config.weight_cap):
            # x = 1 is fixed; a graded coordinate scales by exp(t|z|)
            if c.is_base:
                want = 1.0 if p == sig.zero_index else 0.0
            else:
                want = math.exp(t * c.degree) if p == sig.unit(c.name) else 0.0
            worst = max(worst, abs(got.get(p, 0.0) - want))
    return worst


def cmd_demo_euler(args, out):
    dev = euler_demo(args.t)
    out.write(_json({"t": args.t, "max_deviation": dev}) + "\n")
    return 0 if dev < DEFAULT.pass_threshold else 1


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for indeterminate verdicts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="gradedflow", description="Flows of vector fields on graded domains.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", help="graded commutator of two fields")
    p.add_argument("problem")
    p.add_argument("X")
    p.add_argument("Y")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("flow", help="flow of a field")
    p.add_argument("problem")
    p.add_argument("--field", required=True)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--odd", action="store_true", help="closed-form flow of a homological field")
    kind.add_argument("--degree0", action="store_true", help="numeric flow of a degree-0 field")
    p.add_argument("--point", help="base point, comma separated")
    p.add_argument("--t", type=float, default=0.0, help="time for the degree-0 jet")
    p.add_argument("--grid", action="store_true", help="dump the trajectory as CSV")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("pullback", help="pull a function back through a map")
    p.add_argument("problem")
    p.add_argument("--map", required=True)
    p.add_argument("--function", required=True, help="graded expression on the target")
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("verify", help="run a flow identity check")
    p.add_argument("problem")
    p.add_argument("--check", required=True, choices=["axioms", "invariance", "commuting", "related"])
    p.add_argument("--field", action="append", help="field name; repeat for two-field checks")
    p.add_argument("--map", help="map name for --check related")
    p.add_argument("--point", help="base point for degree-0 axioms")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true", help="print the full report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo-euler", help="numeric Euler flow against its closed form")
    p.add_argument("--t", type=float, default=0.5)
    p.set_defaults(func=cmd_demo_euler)
    return ap


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (GradedFlowError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
