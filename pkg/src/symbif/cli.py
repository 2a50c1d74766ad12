"""Command-line surface: analyses with machine-readable reports.

Subcommands: axes, pattern, planar, gamma, verify, continue, flow,
diagram.  Numbers are serialised at 17 significant digits so identical
configurations produce byte-identical files.  Exit codes: 0 success (or
verification pass), 1 verification failure, 2 usage error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import dynamics as dyn
from . import family as fam
from . import rep_core as rc
from . import symbreak as sbk
from .continuation import ContinuationSettings, HyperplaneSystem, classify_curve, trace_branch
from .family import FamilySpec

KIND_CHOICES = ("odd", "even-minus", "even-plus", "perturbed-odd", "perturbed-even")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json(obj) -> str:
    """Tiny JSON writer with fixed float formatting (17 significant digits)."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f'"{k}": {_json(v)}' for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if obj is None:
        return "null"
    return _fmt(obj)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_axes(args):
    k = args.k
    counts = rc.axis_class_counts(k)
    out = {"k": k, "total": sum(counts.values()),
           "classes": [{"p": p, "count": n} for p, n in sorted(counts.items())]}
    if k <= rc.MAX_ENUM_K and not args.counts_only:
        out["axes"] = [
            {"p": a.p, "members": list(a.members)} for a in rc.enumerate_axes(k)
        ]
    _write(args.out, _json(out))
    return 0


def _cmd_pattern(args):
    spec = FamilySpec(args.k, args.kind)
    pat = fam.branching_pattern(spec)
    rows = [
        {"p": r.axis_class, "sign": r.sign, "index": r.index,
         "multiplicity": r.multiplicity, "speed": r.speed,
         "lambda_exponent": r.lam_exponent}
        for r in pat.records
    ]
    out = {"k": pat.k, "kind": pat.kind, "total_nontrivial": pat.total_nontrivial,
           "records": rows}
    _write(args.out, _json(out))
    return 0


def _cmd_planar(args):
    spec = None
    if args.kind in ("perturbed-even", "even-minus", "even-plus"):
        spec = FamilySpec(args.k, "perturbed-even", eta=args.eta)
    sysm = sbk.planar_system(args.k, args.p, eta=args.eta,
                             cubic=args.cubic and spec is None, spec=spec)
    lams = np.linspace(args.lambda_min, args.lambda_max, args.grid)
    lines = ["lambda,u,v,index,plane_p"]
    for lam in lams:
        try:
            zs = sbk.planar_zeros(sysm, float(lam))
        except Exception:
            continue
        for z in zs:
            lines.append(",".join(
                [_fmt(lam), _fmt(z.u), _fmt(z.v), str(z.index), str(args.p)]
            ))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_gamma(args):
    k, eta = args.k, args.eta
    rows = []
    for p in range(1, (k + 1) // 2):
        gam = sbk.fold_lambda_closed(k, p, eta)
        if p == 1:
            ev = sbk.l1_fold_detect(k, eta, -1.5 * gam, -0.5 * gam)
        else:
            sysm = sbk.planar_system(k, p, eta=eta)
            ev = sbk.fold_detect(sysm, -1.5 * gam, -0.5 * gam, grid=60)
        numeric = abs(ev[0].lam) if ev else float("nan")
        rows.append({"p": p, "closed_form": gam, "numeric": numeric,
                     "rel_err": abs(numeric - gam) / gam})
    _write(args.out, _json({"k": k, "eta": eta, "folds": rows}))
    return 0


def _cmd_verify(args):
    rep = sbk.verify_minimal_model(args.k, args.eta, kind=args.kind or None)
    out = {
        "k": rep.k, "eta": rep.eta, "kind": rep.kind,
        "window": list(rep.window),
        "crossings": rep.crossings, "folds": rep.folds,
        "expected_crossings": rep.expected_crossings,
        "expected_folds": rep.expected_folds,
        "crossing_index_ok": rep.crossing_index_ok,
        "ordering_ok": rep.ordering_ok,
        "staircase_ok": rep.staircase_ok,
        "status": rep.status,
        "pass": rep.passed,
        "fold_table": [
            {"p": p, "closed_form": g, "numeric": lam, "multiplicity": m}
            for (p, g, lam, m) in rep.fold_table
        ],
        "notes": rep.notes,
    }
    _write(args.out, _json(out))
    return 0 if rep.passed else 1


def _cmd_continue(args):
    k, eta = args.k, args.eta
    window = (args.lambda_min, args.lambda_max)
    settings = ContinuationSettings(
        initial_step=1e-3, max_step=max(1e-3, (window[1] - window[0]) / 200.0)
    )
    if args.curve == "crossing":
        p = rc.plane_limit(k) if k % 2 else k // 2
        sysm = sbk.planar_system(k, p, eta=eta,
                                 spec=FamilySpec(k, "perturbed-even", eta=eta)
                                 if k % 2 == 0 else None)
        zs = [z for z in sbk.planar_zeros(sysm, 0.0) if not z.on_l1]
        if not zs:
            raise RuntimeError("no crossing zero at lambda = 0")
        up = trace_branch(sysm._as_system(), (zs[0].uv, 0.0), +1, settings, window)
        dn = trace_branch(sysm._as_system(), (zs[0].uv, 0.0), -1, settings, window)
        pts = list(reversed(dn.points)) + up.points[1:]
        label = classify_curve(up, window) if not dn.folds else "fold-terminated"
        rows = [(pt.lam, sysm.ambient_point(*pt.z), pt.index) for pt in pts]
    elif args.curve == "trivial":
        spec = FamilySpec(k, "perturbed-odd", eta=eta)
        hsys = HyperplaneSystem(spec)
        from .continuation import newton_solve

        z0, _ = newton_solve(hsys, hsys.from_ambient(np.zeros(k)), window[0], settings)
        cur = trace_branch(hsys, (z0, window[0]), +1, settings, window)
        label = classify_curve(cur, window)
        rows = [(pt.lam, hsys.to_ambient(pt.z), pt.index) for pt in cur.points]
    else:  # axis branch of the unforced family
        spec = FamilySpec(k, "odd")
        hsys = HyperplaneSystem(spec)
        s0 = max(1e-3, window[1] / 10.0) if args.sign > 0 else max(1e-3, -window[0] / 10.0)
        x, lam = fam.branch_point(k, args.p, args.sign, s0)
        cur = trace_branch(hsys, (hsys.from_ambient(x), lam),
                           1 if args.sign > 0 else -1, settings, window)
        label = classify_curve(cur, window)
        rows = [(pt.lam, hsys.to_ambient(pt.z), pt.index) for pt in cur.points]
    lines = ["lambda," + ",".join(f"x{i+1}" for i in range(k)) + ",index"]
    for lam, x, idx in rows:
        lines.append(",".join([_fmt(lam)] + [_fmt(v) for v in x] + [str(idx)]))
    lines.append(f"# classification: {label}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_flow(args):
    k = args.k
    kind = args.kind or ("perturbed-odd" if args.eta > 0 else "odd")
    spec = FamilySpec(k, kind, eta=args.eta)
    rng = np.random.default_rng(args.seed)
    if args.start == "random":
        x0 = rc.sumzero(rng.normal(size=k))
    else:
        x0, _ = fam.branch_point(k, args.p, -1 if args.lam < 0 else +1, abs(args.lam))
        x0 = x0 + 1e-3 * rc.sumzero(rng.normal(size=k))
    res = dyn.flow(spec, x0, args.lam, dyn.FlowSettings(horizon=args.horizon))
    lines = ["t," + ",".join(f"x{i+1}" for i in range(k))]
    for t, x in zip(res.times, res.states):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in x]))
    lines.append(f"# classification: {res.classification}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_diagram(args):
    """Static SVG of the branch diagram: lambda against signed radius."""
    k, eta = args.k, args.eta
    gamma1 = sbk.fold_lambda_closed(k, 1, eta)
    window = (-2.0 * gamma1, 2.0 * gamma1)
    lams = np.linspace(window[0], window[1], args.grid)
    series = {}  # (p, branch-id) -> list of (lam, signed radius)
    for p in range(1, rc.plane_limit(k) + 1):
        if p == 1:
            for lam in lams:
                for i, u in enumerate(sorted(sbk._l1_line_zeros(k, eta, lam, False))):
                    series.setdefault((1, i), []).append((lam, u))
        else:
            sysm = sbk.planar_system(k, p, eta=eta)
            for lam in lams:
                zs = sorted(
                    [z for z in sbk.planar_zeros(sysm, lam) if not z.on_l1],
                    key=lambda z: z.v,
                )
                for i, z in enumerate(zs):
                    r = math.copysign(math.hypot(z.u, z.v), z.v)
                    series.setdefault((p, i), []).append((lam, r))
    folds = []
    for p in range(1, (k + 1) // 2):
        g = sbk.fold_lambda_closed(k, p, eta)
        _, bnorm = sbk.fold_point_closed(k, p, eta)
        folds += [(-g, -bnorm if p > 1 else -bnorm), (g, bnorm if p > 1 else bnorm)]

    width, height, margin = 640, 480, 40
    rmax = max(abs(r) for pts in series.values() for _, r in pts) * 1.1 or 1.0

    def sx(lam):
        return margin + (lam - window[0]) / (window[1] - window[0]) * (width - 2 * margin)

    def sy(r):
        return height / 2.0 - r / rmax * (height / 2.0 - margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{sx(0):.2f}" y1="{margin}" x2="{sx(0):.2f}" y2="{height - margin}" '
        'stroke="#999" stroke-dasharray="4 3"/>',
        f'<line x1="{margin}" y1="{sy(0):.2f}" x2="{width - margin}" y2="{sy(0):.2f}" '
        'stroke="#999"/>',
    ]
    for (p, i), pts in sorted(series.items()):
        if len(pts) < 2:
            continue
        d = " ".join(f"{sx(l):.2f},{sy(r):.2f}" for l, r in pts)
        parts.append(
            f'<polyline fill="none" stroke="{colors[(p - 1) % len(colors)]}" '
            f'stroke-width="1.2" points="{d}"/>'
        )
    for lam, r in folds:
        parts.append(
            f'<circle cx="{sx(lam):.2f}" cy="{sy(r):.2f}" r="3.5" fill="black"/>'
        )
    parts.append(
        f'<text x="{width - margin}" y="{height - 12}" text-anchor="end" '
        f'font-size="12">lambda in [{window[0]:.4g}, {window[1]:.4g}], k={k}, '
        f'eta={eta:g}; dots: saddle-nodes</text>'
    )
    parts.append("</svg>")
    _write(args.out, "\n".join(parts) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symbif",
        description="equivariant bifurcation toolkit on the sum-zero hyperplane",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, eta_default=0.01):
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--eta", type=float, default=eta_default)
        p.add_argument("--out", default="-")

    p = sub.add_parser("axes", help="axis catalog")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--counts-only", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_axes)

    p = sub.add_parser("pattern", help="signed indexed branching pattern")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=KIND_CHOICES, default="odd")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_pattern)

    p = sub.add_parser("planar", help="plane-reduction zeros per lambda (CSV)")
    common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--kind", choices=KIND_CHOICES, default="perturbed-odd")
    p.add_argument("--cubic", action="store_true")
    p.add_argument("--lambda-min", type=float, default=-0.3)
    p.add_argument("--lambda-max", type=float, default=0.3)
    p.add_argument("--grid", type=int, default=101)
    p.set_defaults(func=_cmd_planar)

    p = sub.add_parser("gamma", help="closed-form vs numeric fold table")
    common(p)
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser("verify", help="minimal-model count verification")
    common(p)
    p.add_argument("--kind", choices=KIND_CHOICES + ("",), default="")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("continue", help="trace one solution curve (CSV)")
    common(p)
    p.add_argument("--curve", choices=("crossing", "trivial", "axis"), default="crossing")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--sign", type=int, choices=(-1, 1), default=1)
    p.add_argument("--lambda-min", type=float, default=-0.3)
    p.add_argument("--lambda-max", type=float, default=0.3)
    p.set_defaults(func=_cmd_continue)

    p = sub.add_parser("flow", help="integrate one trajectory (CSV)")
    common(p, eta_default=0.0)
    p.add_argument("--kind", choices=KIND_CHOICES + ("",), default="")
    p.add_argument("--lam", type=float, default=-1.0)
    p.add_argument("--start", choices=("random", "axis"), default="random")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--horizon", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("diagram", help="branch diagram SVG with fold markers")
    common(p)
    p.add_argument("--grid", type=int, default=241)
    p.add_argument("--format", choices=("svg",), default="svg")
    p.set_defaults(func=_cmd_diagram)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, argparse.ArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
