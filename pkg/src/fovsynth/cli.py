"""Command-line surface: classify, plan, partition, validate.

Exit codes: 0 success, 1 validation failure (``validate``), 2 domain or
usage error, 3 internal consistency failure (a planned path that does not
pass its own verification).  All angle flags are radians unless
``--degrees`` is given; outputs are always radians.  The ``FOV_SYNTH_TOL``
environment variable overrides the default feasibility tolerance, as in
:class:`fovsynth.synthesis.Synthesis`.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections import Counter

import numpy as np

from . import __version__
from .geometry import is_circular, is_radial
from .synthesis import REGION_ORDER, ConsistencyError, DomainError, Synthesis
from .verify import trace_path, verify_path

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DOMAIN = 2
EXIT_INTERNAL = 3

# canonical configuration per sensor case, used by `validate`
_VALIDATE_CASES: dict[str, tuple[float, float]] = {
    "frontal": (0.10, 0.50),
    "borderline_frontal": (0.25, 0.50),
    "side": (math.pi / 4, math.pi / 6),
    "borderline_side": ((math.pi - 1.2) / 2, 1.2),
    "lateral": (1.0208, 1.2),
}
_ORACLE_BUDGET = 1e-4  # relative to the goal radius, same as the test suite

_REGION_COLORS = {
    "I": "#f2f2f2", "II": "#8dd3c7", "III": "#ffffb3", "IV": "#bebada",
    "V": "#fb8072", "VI": "#80b1d3", "V+": "#fdb462", "W": "#b3de69",
    "II'": "#ccebc5", "IV'": "#d9c7e8", "V'": "#fccde5", "VI'": "#c6dbef",
    "V+'": "#fee8c8", "W'": "#e5f5b7",
}


def _rad(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _edge_identity(phi: float) -> str:
    if is_radial(phi):
        return "radial half-line through the landmark"
    if is_circular(phi):
        return "circle centred on the landmark"
    return "logarithmic spiral"


# ---------------------------------------------------------------------------
# classify


def cmd_classify(args: argparse.Namespace) -> int:
    gamma = _rad(args.gamma, args.degrees)
    delta = _rad(args.delta, args.degrees)
    syn = Synthesis(gamma, delta)
    out = {
        "schema": "fovsynth.case.v1",
        "gamma": gamma,
        "delta": delta,
        "case": syn.case.value,
        "phi1": syn.phi1,
        "phi2": syn.phi2,
        "edge1": _edge_identity(syn.phi1),
        "edge2": _edge_identity(syn.phi2),
        "mirrored": syn.mirrored,
        "reversed": syn.reversed_frame,
    }
    if args.json:
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    print(f"case        {syn.case.value}")
    print(f"phi1        {_fmt(syn.phi1)} rad   edge1: {out['edge1']}")
    print(f"phi2        {_fmt(syn.phi2)} rad   edge2: {out['edge2']}")
    flags = []
    if syn.mirrored:
        flags.append("mirrored across the goal ray (gamma < 0)")
    if syn.reversed_frame:
        flags.append("drive directions swapped (|gamma| > pi/2)")
    print(f"reductions  {'; '.join(flags) if flags else 'none'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plan


def _write_trace_csv(path_obj, fname: str) -> None:
    samples = trace_path(path_obj)
    with open(fname, "w", encoding="utf-8") as fh:
        fh.write("# fovsynth.trace.v1\n")
        fh.write("s,x,y,theta,rho,psi,beta,arc_index\n")
        for smp in samples:
            d = smp.to_dict()
            fh.write(
                ",".join(
                    _fmt(d[k]) for k in ("s", "x", "y", "theta", "rho", "psi", "beta")
                )
                + f",{d['arc_index']}\n"
            )


def cmd_plan(args: argparse.Namespace) -> int:
    gamma = _rad(args.gamma, args.degrees)
    delta = _rad(args.delta, args.degrees)
    q_psi = _rad(args.q_psi, args.degrees)
    syn = Synthesis(gamma, delta, goal_rho=args.rho_p)
    path = syn.plan(args.q_rho, q_psi)
    report = verify_path(
        path, gamma, delta, tol=syn.tol,
        check_confine=syn.case.value != "lateral",
    )

    if args.trace:
        _write_trace_csv(path, args.trace)

    if args.json:
        d = path.to_dict()
        d["feasible"] = report.ok
        d["max_violation"] = report.visibility.max_violation
        print(json.dumps(d, sort_keys=True))
    else:
        print(f"case          {syn.case.value}")
        print(f"region        {path.region}" + ("  (image)" if path.image else ""))
        print(f"word          {path.word if path.word else '(already at goal)'}")
        print(f"total length  {_fmt(path.length)}")
        if path.arcs:
            print("arc  kind dir      length  start rho,psi        end rho,psi")
            for i, a in enumerate(path.arcs):
                dir_s = {1: "+", -1: "-", 0: " "}[a.drive]
                print(
                    f"{i:3d}  {a.kind:4s} {dir_s}   {a.length:12.9f}"
                    f"  ({_fmt(a.start.rho)}, {_fmt(a.start.psi)})"
                    f"  ({_fmt(a.end.rho)}, {_fmt(a.end.psi)})"
                )
        verdict = "ok" if report.ok else "FAILED: " + "; ".join(report.issues)
        print(f"feasibility   {verdict} "
              f"(max cone violation {report.visibility.max_violation:.3e} rad)")

    if not report.ok:
        print("planned path failed verification; this is a planner bug",
              file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# partition


def _parse_resolution(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise DomainError(f"resolution must look like 96x192, got {text!r}") from exc


def _write_partition_csv(part: dict, fname: str) -> None:
    with open(fname, "w", encoding="utf-8") as fh:
        fh.write(f"# {part['schema']}\n")
        fh.write("rho,psi,label,length\n")
        for i, rho in enumerate(part["rho"]):
            for j, psi in enumerate(part["psi"]):
                fh.write(
                    f"{_fmt(rho)},{_fmt(psi)},{part['labels'][i][j]},"
                    f"{_fmt(part['lengths'][i][j])}\n"
                )


def _svg_xy(x: float, y: float, window: float, side: float, pad: float):
    s = side / (2.0 * window)
    return pad + (x + window) * s, pad + (window - y) * s


def _write_partition_svg(part: dict, fname: str) -> None:
    window = 1.02 * max(part["rho"])
    side, pad, legend_w = 820.0, 30.0, 280.0
    width = side + 2 * pad + legend_w
    height = side + 2 * pad

    rhos, psis = part["rho"], part["psi"]
    n_rho, n_psi = len(rhos), len(psis)
    dr = rhos[0]  # uniform radial step, first sample sits at one step
    dp = 2.0 * math.pi / n_psi

    def pt(x: float, y: float) -> str:
        sx, sy = _svg_xy(x, y, window, side, pad)
        return f"{sx:.2f},{sy:.2f}"

    chunks = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f"<!-- {part['schema']}: case={part['case']} gamma={part['gamma']:.6g} "
        f"delta={part['delta']:.6g} -->",
    ]
    # region fills: one annular-sector quad per classified cell
    for i, rho in enumerate(rhos):
        r0, r1 = rho - 0.5 * dr, rho + 0.5 * dr
        for j, psi in enumerate(psis):
            p0, p1 = psi - 0.5 * dp, psi + 0.5 * dp
            color = _REGION_COLORS.get(part["labels"][i][j], "#dddddd")
            corners = [
                (r0 * math.cos(p0), r0 * math.sin(p0)),
                (r1 * math.cos(p0), r1 * math.sin(p0)),
                (r1 * math.cos(p1), r1 * math.sin(p1)),
                (r0 * math.cos(p1), r0 * math.sin(p1)),
            ]
            chunks.append(
                f'<polygon points="{" ".join(pt(*c) for c in corners)}" '
                f'fill="{color}" stroke="none"/>'
            )
    # analytic borders on top
    for b in part["borders"]:
        pts = " ".join(pt(x, y) for x, y in b["points"])
        chunks.append(
            f'<polyline points="{pts}" fill="none" stroke="#222222" '
            f'stroke-width="1.1"><title>{b["name"]}</title></polyline>'
        )
    # landmark and goal markers
    ox, oy = _svg_xy(0.0, 0.0, window, side, pad)
    gx, gy = _svg_xy(part["goal_rho"], 0.0, window, side, pad)
    chunks += [
        f'<circle cx="{ox:.1f}" cy="{oy:.1f}" r="4" fill="#000"/>',
        f'<text x="{ox + 8:.1f}" y="{oy - 6:.1f}" font-size="15">O</text>',
        f'<circle cx="{gx:.1f}" cy="{gy:.1f}" r="4" fill="#c00"/>',
        f'<text x="{gx + 8:.1f}" y="{gy - 6:.1f}" font-size="15">P</text>',
    ]
    # legend: one row per region present, with its most common word
    seen: dict[str, Counter] = {}
    for i in range(n_rho):
        for j in range(n_psi):
            seen.setdefault(part["labels"][i][j], Counter())[part["words"][i][j]] += 1
    lx = side + 2 * pad
    ly = pad + 10
    chunks.append(
        f'<text x="{lx:.0f}" y="{ly:.0f}" font-size="16" font-weight="bold">'
        f"case: {part['case']}</text>"
    )
    ly += 14
    order = {label: k for k, label in enumerate(REGION_ORDER)}
    for label in sorted(seen, key=lambda s: order.get(s, 99)):
        word = seen[label].most_common(1)[0][0] or "(goal)"
        ly += 22
        chunks += [
            f'<rect x="{lx:.0f}" y="{ly - 13:.0f}" width="16" height="16" '
            f'fill="{_REGION_COLORS.get(label, "#dddddd")}" stroke="#555"/>',
            f'<text x="{lx + 24:.0f}" y="{ly:.0f}" font-size="14" '
            f'font-family="monospace">{label}: {word}</text>',
        ]
    chunks.append("</svg>")
    with open(fname, "w", encoding="utf-8") as fh:
        fh.write("\n".join(chunks) + "\n")


def cmd_partition(args: argparse.Namespace) -> int:
    gamma = _rad(args.gamma, args.degrees)
    delta = _rad(args.delta, args.degrees)
    n_rho, n_psi = _parse_resolution(args.resolution)
    syn = Synthesis(gamma, delta, goal_rho=args.rho_p)
    part = syn.partition(n_rho, n_psi, rho_max=args.window)
    for out in args.out:
        if out.endswith(".svg"):
            _write_partition_svg(part, out)
        elif out.endswith(".csv"):
            _write_partition_csv(part, out)
        elif out.endswith(".json"):
            with open(out, "w", encoding="utf-8") as fh:
                json.dump(part, fh, sort_keys=True)
        else:
            raise DomainError(f"cannot infer format of {out!r} (.svg/.csv/.json)")
        print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def _validate_case(name: str, gamma: float, delta: float, samples: int,
                   seed: int) -> dict:
    from .oracle import FamilyOracle

    syn = Synthesis(gamma, delta)
    syn_mirror = Synthesis(-gamma, delta)
    scale = 2.5
    syn_scaled = Synthesis(gamma, delta, goal_rho=scale)
    oracle = FamilyOracle(syn.cone.phi1, syn.cone.phi2, syn.rho_p)
    rng = np.random.default_rng([seed, list(_VALIDATE_CASES).index(name)])

    max_diff = 0.0
    max_viol = -math.inf
    max_scaling = 0.0
    max_mirror = 0.0
    feas_failures = 0
    for _ in range(samples):
        rho = float(rng.uniform(0.1, 2.5)) * syn.rho_p
        psi = float(rng.uniform(-math.pi, math.pi))
        path = syn.plan(rho, psi)
        max_diff = max(max_diff, abs(path.length - oracle.best(rho, psi).length))
        rep = verify_path(path, gamma, delta, tol=syn.tol,
                          check_confine=name != "lateral")
        max_viol = max(max_viol, rep.visibility.max_violation)
        if not rep.ok:
            feas_failures += 1
        ref = max(path.length, 1e-12 * syn.rho_p)
        scaled = syn_scaled.plan(scale * rho, psi).length
        max_scaling = max(max_scaling, abs(scaled - scale * path.length) / (scale * ref))
        mirrored = syn_mirror.plan(rho, -psi).length
        max_mirror = max(max_mirror, abs(mirrored - path.length) / ref)

    oracle_ok = max_diff <= _ORACLE_BUDGET * syn.rho_p
    scaling_ok = max_scaling <= 1e-12
    mirror_ok = max_mirror <= 1e-12
    return {
        "case": name,
        "gamma": gamma,
        "delta": delta,
        "samples": samples,
        "max_oracle_diff": max_diff,
        "oracle_budget": _ORACLE_BUDGET * syn.rho_p,
        "oracle_pass": oracle_ok,
        "feasibility_failures": feas_failures,
        "max_visibility_violation": None if max_viol == -math.inf else max_viol,
        "scaling_max_rel": max_scaling,
        "scaling_pass": scaling_ok,
        "mirror_max_rel": max_mirror,
        "mirror_pass": mirror_ok,
        "pass": oracle_ok and scaling_ok and mirror_ok and feas_failures == 0,
    }


def cmd_validate(args: argparse.Namespace) -> int:
    if args.cases == "all":
        names = list(_VALIDATE_CASES)
    else:
        names = [c.strip() for c in args.cases.split(",") if c.strip()]
        unknown = [c for c in names if c not in _VALIDATE_CASES]
        if unknown:
            raise DomainError(
                f"unknown cases {unknown}; pick from {list(_VALIDATE_CASES)}"
            )
    cases = {}
    for name in names:
        gamma, delta = _VALIDATE_CASES[name]
        cases[name] = _validate_case(name, gamma, delta, args.samples, args.seed)
    report = {
        "schema": "fovsynth.report.v1",
        "seed": args.seed,
        "samples": args.samples,
        "cases": cases,
        "pass": all(c["pass"] for c in cases.values()),
    }
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK if report["pass"] else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser


def _add_cone_flags(p: argparse.ArgumentParser, *, rho_p: bool = True) -> None:
    p.add_argument("--gamma", type=float, required=True,
                   help="cone axis offset from the heading")
    p.add_argument("--delta", type=float, required=True, help="cone aperture")
    if rho_p:
        p.add_argument("--rho-p", type=float, default=1.0,
                       help="goal distance from the landmark (default 1)")
    p.add_argument("--degrees", action="store_true",
                   help="interpret angle flags as degrees")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fovsynth",
        description="Shortest unicycle paths that keep a landmark in a sensor cone.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="sensor case for a cone")
    _add_cone_flags(p, rho_p=False)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("plan", help="shortest path from one start pose region")
    _add_cone_flags(p)
    p.add_argument("--q-rho", type=float, required=True,
                   help="start distance from the landmark")
    p.add_argument("--q-psi", type=float, required=True,
                   help="start polar angle (goal sits at angle 0)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--trace", metavar="FILE.csv",
                   help="also write a dense pose trace")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("partition", help="export the region atlas")
    _add_cone_flags(p)
    p.add_argument("--out", action="append", required=True, metavar="FILE",
                   help="output file; repeatable; .svg, .csv or .json")
    p.add_argument("--window", type=float, default=None,
                   help="atlas radius (default 1.5 * rho_p)")
    p.add_argument("--resolution", default="64x128",
                   help="radial x angular samples (default 64x128)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("validate", help="oracle agreement and invariant sweep")
    p.add_argument("--samples", type=int, default=25,
                   help="queries per case (default 25)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", default="all",
                   help=f"'all' or comma list of {list(_VALIDATE_CASES)}")
    p.add_argument("--out", metavar="FILE.json", help="also save the report")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
