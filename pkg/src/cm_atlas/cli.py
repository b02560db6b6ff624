"""Command line entry point: ``cm-atlas <command> [options]``.

Exit status is 0 on success, 1 when a verification fails and 2 on misuse.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import modular, orders, qforms, survey
from .cache import HCPCache, MemoryHCP
from .report import FORMATS, Report, RunConfig, UsageError, emit_report

log = logging.getLogger("cm_atlas")


def _disc(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    try:
        qforms.check_discriminant(d)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return d


def _form_row(f):
    return [f.a, f.b, f.c]


def _shape(divisors) -> str:
    if not divisors:
        return "trivial"
    return " x ".join(f"Z/{d}" for d in divisors)


def _pt(p):
    return [str(p.x), str(p.y)]


def _prefetch(hcp, cfg, *class_numbers):
    discs = [d for h in class_numbers for d in orders.list_by_class_number(cfg.scan_bound, h)]
    hcp.prefetch(discs, cfg.workers)


# ---------------------------------------------------------------- commands


def cmd_forms(args, cfg, hcp):
    forms = qforms.enumerate_reduced(args.disc)
    rows = [_form_row(f) for f in forms]
    text = "\n".join(str(f) for f in forms) + f"\n# h({args.disc}) = {len(forms)}"
    return Report("forms", {"disc": args.disc}, {"forms": rows, "class_number": len(forms)},
                  columns=["a", "b", "c"], rows=rows, text=text)


def cmd_classgroup(args, cfg, hcp):
    G = qforms.class_group(args.disc)
    out = {
        "class_number": G.order,
        "elementary_divisors": list(G.elementary_divisors),
        "forms": [_form_row(f) for f in G.reduced_forms],
        "two_torsion": all(d == 2 for d in G.elementary_divisors),
    }
    text = f"Cl({args.disc}) = {_shape(G.elementary_divisors)}, h = {G.order}"
    return Report("classgroup", {"disc": args.disc}, out, text=text)


def cmd_hcp(args, cfg, hcp):
    H = hcp(args.disc)
    out = {"coefficients": list(H.coefficients), "degree": H.degree, "polynomial": str(H)}
    rows = [[k, c] for k, c in enumerate(H.coefficients)]
    return Report("hcp", {"disc": args.disc}, out, columns=["degree", "coefficient"], rows=rows, text=str(H))


def cmd_subfields(args, cfg, hcp):
    try:
        s = modular.quadratic_subfields(args.disc, cfg.precision_guard_bits)
    except ValueError as exc:
        raise UsageError(str(exc))
    subs = sorted(s.quadratic_subfields)
    text = f"Q(j) for {args.disc}: degree {s.degree}, quadratic subfields " + (
        ", ".join(f"Q(sqrt{d})" for d in subs) or "none")
    return Report("subfields", {"disc": args.disc}, {"degree": s.degree, "quadratic_subfields": subs}, text=text)


def cmd_table1(args, cfg, hcp):
    bound = args.bound or cfg.scan_bound
    discs = orders.weinberger_scan(bound)
    rows = []
    for d in discs:
        od = orders.split_discriminant(d)
        G = qforms.class_group(d)
        rows.append([d, od.D, od.f, G.order, "x".join(map(str, G.elementary_divisors))])
    by_h: dict[int, list[int]] = {}
    for r in rows:
        by_h.setdefault(r[3], []).append(r[0])
    text = "\n".join(f"h={h}: " + ", ".join(map(str, ds)) for h, ds in sorted(by_h.items()))
    text += f"\n# {len(rows)} discriminants with 2-torsion class group, |disc| <= {bound}"
    out = {"discriminants": discs, "count": len(discs), "by_class_number": {str(h): v for h, v in by_h.items()}}
    return Report("table1", {"bound": bound}, out, columns=["disc", "D", "f", "h", "divisors"], rows=rows, text=text)


def cmd_table2(args, cfg, hcp):
    table = survey.build_table2(cfg.scan_bound)
    rows = [[r.label, r.degree, " ".join(map(str, r.discriminants)), _shape(r.class_group)] for r in table]
    width = max(len(r[0]) for r in rows)
    text = "\n".join(f"{r[0]:<{width}}  {r[1]:>2}  {r[2]}  [{r[3]}]" for r in rows)
    out = {"rows": [{"field": r.label, "degree": r.degree, "discriminants": list(r.discriminants),
                     "class_group": list(r.class_group), "quadratic_subfields": list(r.subfields)} for r in table]}
    return Report("table2", {}, out, columns=["field", "degree", "discriminants", "class_group"], rows=rows, text=text)


def cmd_points(args, cfg, hcp):
    _prefetch(hcp, cfg, 2 if args.quadratic else 1)
    if args.quadratic:
        inv = survey.quadratic_inventory(hcp, cfg.scan_bound)
        pts = inv.points
        out = {
            "count": len(pts),
            "conjugate_points": len(inv.conjugate_points),
            "pair_points": len(inv.pair_points),
            "ordered_pairs": len(inv.ordered_pairs),
            "same_order_field_pairs": [list(p) for p in inv.same_order_field_pairs],
        }
        kind = "quadratic"
    else:
        pts = survey.rational_cm_points(hcp, cfg.scan_bound)
        out = {"count": len(pts)}
        kind = "rational"
    rows = [[p.disc1, p.disc2] + _pt(p) for p in pts]
    out["points"] = rows
    text = "\n".join(f"{p.disc1} {p.disc2}  {p}" for p in pts) + f"\n# {len(pts)} {kind} CM-points"
    return Report("points", {"kind": kind}, out, columns=["disc1", "disc2", "x1", "x2"], rows=rows, text=text)


def cmd_scan_collinear(args, cfg, hcp):
    pts = survey.rational_cm_points(hcp, cfg.scan_bound)
    triples = survey.scan_collinear_rational(pts)
    reps = survey.up_to_swap(triples)
    ser = lambda ts: [[_pt(p) for p in t] for t in ts]
    out = {"triples": ser(triples), "up_to_swap": ser(reps), "count": len(triples), "count_up_to_swap": len(reps)}
    text = "\n".join("  ".join(str(p) for p in t) for t in reps)
    text += f"\n# {len(reps)} triples up to swapping x1, x2 ({len(triples)} in total)"
    rows = [[i, str(p.x), str(p.y)] for i, t in enumerate(reps) for p in t]
    return Report("scan-collinear", {}, out, columns=["triple", "x1", "x2"], rows=rows, text=text)


def cmd_audit(args, cfg, hcp):
    _prefetch(hcp, cfg, 1, 2)
    rational = survey.rational_cm_points(hcp, cfg.scan_bound)
    inv = survey.quadratic_inventory(hcp, cfg.scan_bound)
    audit = survey.quadratic_line_audit(inv.points, rational)
    n_conj = len(inv.conjugate_points)

    def subset(lo, hi):
        hits = [(i, k) for i, k in audit.rational_hits if lo <= i < hi]
        return {
            "lines": hi - lo,
            "distinct": len(set(audit.lines[lo:hi])),
            "special": [i for i in audit.special if lo <= i < hi],
            "rational_hits": [{"point": _pt(inv.points[i]), "discs": [inv.points[i].disc1, inv.points[i].disc2],
                               "line": str(audit.lines[i]), "rational_point": _pt(rational[k])} for i, k in hits],
        }

    out = {
        "lines": len(audit.lines),
        "distinct": audit.distinct,
        "violations": audit.violations,
        "duplicates": [list(p) for p in audit.duplicates],
        "conjugate_subset": subset(0, n_conj),
        "pair_subset": subset(n_conj, len(audit.lines)),
        "all": subset(0, len(audit.lines)),
    }
    passed = audit.violations == 0
    text = (f"{len(audit.lines)} lines, {audit.distinct} distinct, {len(audit.special)} special, "
            f"{len(audit.rational_hits)} containing a rational CM-point")
    for name in ("conjugate_subset", "pair_subset"):
        s = out[name]
        text += f"\n{name}: {s['lines']} lines, {s['distinct']} distinct, {len(s['rational_hits'])} rational hits"
        for h in s["rational_hits"]:
            text += f"\n  {h['discs']} {h['line']} passes through ({', '.join(h['rational_point'])})"
    text += "\n" + ("PASS" if passed else "FAIL")
    return Report("audit-quadratic-lines", {}, out, passed=passed, text=text)


def cmd_verify(args, cfg, hcp):
    leg_b = survey.leg_b_discriminants()
    hcp.prefetch(orders.weinberger_scan(cfg.scan_bound) + leg_b + [4 * d for d in leg_b], cfg.workers)
    rep = survey.verify_theorem(hcp, cfg.scan_bound)
    a, b, c = rep["legA"], rep["legB"], rep["exceptions"]
    lines = [
        f"leg A: {a['couple_count']} couples over {a['field_count']} fields, "
        f"{sum(x['witness'] is not None for x in a['couples'])} similar  {'PASS' if a['pass'] else 'FAIL'}",
        f"leg B: discriminants {b['discriminants']}, "
        f"{sum(x['witness'] is not None for x in b['checks'])} similar  {'PASS' if b['pass'] else 'FAIL'}",
        f"exceptions: {c['rational_points']} rational, {c['quadratic_points']} quadratic "
        f"({c['conjugate_points']} + {c['pair_points']}, {c['ordered_pairs']} ordered pairs)  "
        f"{'PASS' if c['pass'] else 'FAIL'}",
        "PASS" if rep["pass"] else "FAIL",
    ]
    return Report("verify-theorem", {}, rep, passed=rep["pass"], text="\n".join(lines))


COMMANDS = {
    "forms": cmd_forms,
    "classgroup": cmd_classgroup,
    "hcp": cmd_hcp,
    "subfields": cmd_subfields,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "points": cmd_points,
    "scan-collinear": cmd_scan_collinear,
    "audit-quadratic-lines": cmd_audit,
    "verify-theorem": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="output format (default text)")
    common.add_argument("--cache", type=Path, default=argparse.SUPPRESS, help="HCP cache file")
    common.add_argument("--no-cache", action="store_true", default=argparse.SUPPRESS, help="keep HCPs in memory only")
    common.add_argument("--scan-bound", type=int, default=argparse.SUPPRESS)
    common.add_argument("--guard-bits", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS, help="append wall time")

    p = argparse.ArgumentParser(
        prog="cm-atlas", description="Class groups, class polynomials and CM-points on rational lines.", parents=[common]
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for name in ("forms", "classgroup", "hcp", "subfields"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--disc", type=_disc, required=True, help="negative discriminant")
    s = sub.add_parser("table1", parents=[common])
    s.add_argument("--bound", type=int, default=None)
    s = sub.add_parser("points", parents=[common])
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--rational", action="store_true")
    g.add_argument("--quadratic", action="store_true")
    for name in ("table2", "scan-collinear", "audit-quadratic-lines", "verify-theorem"):
        sub.add_parser(name, parents=[common])
    return p


def run_command(argv=None, stdout=None) -> tuple[int, Report | None]:
    stdout = stdout if stdout is not None else sys.stdout.buffer
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    opt = vars(args)
    try:
        cfg = RunConfig(
            scan_bound=opt.get("scan_bound", 10_000),
            precision_guard_bits=opt.get("guard_bits", 64),
            cache_path=opt.get("cache"),
            output_format=opt.get("format", "text"),
            workers=opt.get("workers", 1),
        )
        hcp = MemoryHCP(cfg.precision_guard_bits) if opt.get("no_cache") else HCPCache(cfg.cache_path, cfg.precision_guard_bits)
        start = time.perf_counter()
        report = COMMANDS[args.command](args, cfg, hcp)
        report.timing = time.perf_counter() - start
        report.config = cfg.public()
        stdout.write(emit_report(report, cfg.output_format, opt.get("timing", False)))
    except (UsageError, ValueError) as exc:
        print(f"cm-atlas: error: {exc}", file=sys.stderr)
        return 2, None
    stdout.flush()
    return (0 if report.passed else 1), report


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    code, _ = run_command(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
