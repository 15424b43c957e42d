"""Command-line front end: ``k3pic analyze|regress|lattice|mirror-scan|polytope``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from .budget import Budget
from .discform import (DEFAULT_CAP, canonical_label, discriminant_form, enumerate_isotropic,
                       find_isomorphism, overlattice_gram, parse_form, quotient_form)
from .errors import (BudgetExhausted, CapExceeded, DegenerateLattice, DegeneratePolytope,
                     FixtureError, InvalidFormParams, InvalidWeights, K3PicError,
                     NoFibreFound, NoUniqueInteriorPoint, NonGorensteinEdge, ParseError,
                     ValidationError)
from .fibration import (FibrationList, best_report, find_fibrations, jacobian_analysis, pic_candidates,
                        report_dot)
from .fixtures import (FamilyRecord, is_form_descriptor, load_fixtures,  # noqa: F401
                       parse_fixtures, validate_record)
from .lattice import GramLattice, MLattice, TLattice, m_disc, parse_lattice_expr, t_disc, to_gram
from .mirror import mirror_check, mirror_scan, pairing_table, scan_differences
from .polytope import WeightVector, boundary_partition, build_newton_polytope, polar_dual
from .resolution import build_curve_graph, picard_rank, resolve_edges

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL, EXIT_FIXTURE = 0, 1, 2, 3, 4

INPUT_ERRORS = (InvalidWeights, ParseError, ValidationError, InvalidFormParams,
                DegenerateLattice, DegeneratePolytope, NoUniqueInteriorPoint,
                NonGorensteinEdge)


def _emit(obj, as_json: bool, text: str = ""):
    if as_json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _form_json(f) -> dict:
    try:
        return f.to_dict()
    except CapExceeded:
        return {"group": list(f.orders), "label": None}


# -- analyze ----------------------------------------------------------------

def analyze(weights: Sequence[int], budget: Optional[int] = 10 ** 6, cap: int = DEFAULT_CAP,
            max_reports: int = 10):
    """Full pipeline for one weight vector; returns ``(report_dict, graph, best)``."""
    w = WeightVector(tuple(weights))
    p = build_newton_polytope(w)
    res = resolve_edges(p)
    g = build_curve_graph(p, res)
    rank = picard_rank(p, res, g)
    note = None
    try:
        fibs = find_fibrations(g, rank.rho, Budget(budget))
    except NoFibreFound as e:
        fibs, note = FibrationList(), str(e)
    best = best_report(fibs)
    pic = []
    if best is not None:
        try:
            for m, lat in pic_candidates(best, rank.rho, Budget(budget), cap=cap):
                q = discriminant_form(lat)
                pic.append({"mw_or_index": m, "det": lat.det, "gram": lat.matrix(),
                            "form": _form_json(q)})
        except (BudgetExhausted, CapExceeded) as e:
            pic.append({"error": str(e)})
    out = {
        "weights": list(w.q),
        "polytope": {"vertices": len(p.vertices), "facets": len(p.facets),
                     "edges": len(p.edges), "points": len(p.points)},
        "edges": [{"edge": r.edge_id, "facets": list(r.facets), "lattice_length": r.multiplicity,
                   "a_type": r.a_type} for r in res],
        "rank": rank.to_dict(),
        "curve_graph": g.to_dict(),
        "fibrations": [dict(r.to_dict(), description=r.describe()) for r in fibs[:max_reports]],
        "fibrations_found": len(fibs),
        "fibrations_truncated": fibs.truncated,
        "fibration_note": note,
        "best_fibration": None if best is None else best.describe(),
        "pic_candidates": pic,
    }
    return out, g, best


def cmd_analyze(args) -> int:
    out, g, best = analyze(args.weights, budget=args.budget, cap=args.cap)
    if args.dot:
        text = report_dot(g, best) if best is not None else g.to_dot()
        with open(args.dot, "w") as fh:
            fh.write(text)
    lines = [f"weights {tuple(out['weights'])}: rho = {out['rank']['rho']} "
             f"(matrix rank {out['rank']['matrix_rank']}, "
             f"dim {out['rank']['matrix_dim']})",
             f"fibrations found: {out['fibrations_found']}"
             + (" (truncated)" if out["fibrations_truncated"] else "")
             + (f" ({out['fibration_note']})" if out["fibration_note"] else "")]
    if best is not None:
        lines.append(f"best fibration: {out['best_fibration']}, sections {best.sections}, "
                     f"rk(MW) {best.rk_mw}")
    for c in out["pic_candidates"]:
        if "error" in c:
            lines.append(f"  pic candidate search stopped: {c['error']}")
        else:
            lines.append(f"  pic candidate: det {c['det']}, q = {c['form']['label']}")
    _emit(out, args.json, "\n".join(lines))
    return EXIT_OK


# -- polytope ----------------------------------------------------------------

def cmd_polytope(args) -> int:
    p = build_newton_polytope(WeightVector(tuple(args.weights)))
    d = p.to_dict()
    d["boundary"] = boundary_partition(p)
    text = (f"{len(p.vertices)} vertices, {len(p.edges)} edges, {len(p.facets)} facets, "
            f"{len(p.points)} lattice points, reflexive: {polar_dual(p)[1]}")
    _emit(d, args.json, text)
    return EXIT_OK


# -- lattice -------------------------------------------------------------------

def _lattice_or_form(text: str):
    text = text.strip()
    if is_form_descriptor(text) or text == "0":
        return None, parse_form(text)
    if text.startswith("[["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad Gram matrix: {e}") from None
        lat = GramLattice.from_matrix(rows)
    else:
        lat = to_gram(text)
    return lat, discriminant_form(lat)


def cmd_lattice(args) -> int:
    lat, q = _lattice_or_form(args.expr)
    sub = args.subcommand
    if sub == "disc":
        if lat is None:
            raise ValidationError("disc needs a lattice, not a form")
        out = {"det": lat.det, "rank": lat.rank, "signature": list(lat.signature),
               "even": lat.is_even, "group_order": q.order}
        try:
            e = parse_lattice_expr(args.expr)
        except ParseError:
            e = None
        if isinstance(e, TLattice):
            out["formula"] = t_disc(e.p, e.q, e.r)
        elif isinstance(e, MLattice):
            out["formula"] = m_disc(e.ps, e.iis, e.k)
        text = f"det {lat.det}" + (f", formula {out['formula']}" if "formula" in out else "")
        _emit(out, args.json, text)
    elif sub == "form":
        out = _form_json(q)
        _emit(out, args.json, f"group {list(q.orders) or 'trivial'}, q = {out['label']}")
    elif sub in ("isotropic", "overlattices"):
        budget = Budget(args.budget)
        subs = enumerate_isotropic(q, dedup=True, cap=args.cap, budget=budget)
        rows = []
        for h in subs:
            if h.order == 1:
                continue
            qm = quotient_form(q, h)
            row = {"order": h.order, "generators": [list(x) for x in h.generators],
                   "q_M": canonical_label(qm) or _form_json(qm)}
            if sub == "overlattices" and lat is not None:
                m = overlattice_gram(lat, h, form=q)
                row["det"] = m.det
                row["gram"] = m.matrix()
            rows.append(row)
        text = "\n".join(f"order {r['order']} gen {r['generators']}: q_M = {r['q_M']}"
                         for r in rows) or "no nontrivial isotropic subgroups"
        _emit({"group": list(q.orders), "classes": rows}, args.json,
              f"{len(rows)} nontrivial classes\n" + text)
    elif sub == "iso":
        if not args.other:
            raise ValidationError("iso needs a second lattice or form")
        lat2, q2 = _lattice_or_form(args.other)
        w = find_isomorphism(q, q2, cap=args.cap, budget=Budget(args.budget))
        out = {"form_isomorphic": w is not None,
               "witness": None if w is None else [list(x) for x in w]}
        if lat is not None and lat2 is not None:
            out.update(same_rank=lat.rank == lat2.rank, same_det=lat.det == lat2.det,
                       same_signature=lat.signature == lat2.signature)
        ok = all(v for k, v in out.items() if k != "witness")
        _emit(out, args.json, "isomorphic at invariant level" if ok else "not isomorphic")
    return EXIT_OK


# -- mirror scan ----------------------------------------------------------------

def cmd_mirror_scan(args) -> int:
    recs = load_fixtures(args.fixtures)
    scan = mirror_scan(recs, cap=args.cap)
    diff = scan_differences(recs, scan)
    ids = sorted(scan)
    matrix = [[int(j in scan[i]) for j in ids] for i in ids]
    out = {"partners": {str(i): scan[i] for i in ids}, "matrix": matrix,
           "differences": {str(i): {"table": a, "scan": b} for i, (a, b) in diff.items()}}
    text = pairing_table(scan)
    if diff:
        text += "\nrows differing from the fixture partner column:\n"
        text += "\n".join(f"  {i}: table {a or 'not on list'}, scan {b or 'not on list'}"
                          for i, (a, b) in sorted(diff.items()))
    _emit(out, args.json, text)
    return EXIT_OK


# -- regression ----------------------------------------------------------------

WORKED = (19, 26, 65)


def _check(name, ok, detail=""):
    return {"check": name, "ok": bool(ok), "detail": detail}


def worked_example_checks(rec: FamilyRecord, rho: int, g, budget: Optional[int]) -> List[dict]:
    """Fibration and Mordell-Weil checks for the families worked out by hand."""
    fibs = find_fibrations(g, rho, Budget(budget))
    pic = rec.pic_lattice()
    out = []

    def find(types, sectionless=False):
        for r in fibs:
            tc = {k: v for k, v in r.type_counts().items() if k != "I"}
            if tc == types and bool(r.sections) != sectionless and r.rk_mw == 0:
                return r
        return None

    if rec.id == 26:
        r = find({"E~7": 1, "A~1": 5})
        out.append(_check("E~7+5A~1 fibration, 2 sections, rk(MW)=0",
                          r is not None and len(r.sections) == 2))
        if r is not None:
            m = r.pic_disc_candidates
            out.append(_check("|MW|^2 |det Pic| = disc product",
                              any(mm * mm * abs(pic.det) == r.disc_product for mm, _ in m),
                              f"candidates {m}, det {pic.det}"))
            q = discriminant_form(pic)
            cands = pic_candidates(r, rho)
            out.append(_check("fixture Pic form among overlattice candidates",
                              any(find_isomorphism(discriminant_form(c), q) for _, c in cands)))
    elif rec.id == 65:
        r = find({"D~16": 1})
        out.append(_check("D~16 fibration with 2 <= |MW| <= 4, |MW| = 2, |disc Pic| = 1",
                          r is not None and (r.mw_lower, r.mw_upper) == (2, 4)
                          and r.pic_disc_candidates == [(2, 1)]))
        r2 = find({"E~8": 2})
        out.append(_check("E~8+E~8 fibration with disc product 1",
                          r2 is not None and r2.disc_product == 1))
    elif rec.id == 19:
        r = find({"D~4": 1, "A~1": 1}, sectionless=True)
        ok = r is not None
        detail = ""
        if ok:
            jac, n, cands = jacobian_analysis(r, rho, Budget(budget))
            q = discriminant_form(pic)
            ok = jac.rank == rho == 2 + 4 + 1 and n == 2 and any(
                c.det == pic.det and find_isomorphism(discriminant_form(c), q) for c in cands)
            detail = f"n = {n}, {len(cands)} candidates"
        out.append(_check("sectionless D~4+A~1, 7 = 2+4+1, n = 2, fixture among candidates",
                          ok, detail))
    return out


def regress_record(rec: FamilyRecord, budget: Optional[int] = 10 ** 6,
                   worked: bool = False) -> dict:
    checks = []
    try:
        p = build_newton_polytope(rec.weights)
        res = resolve_edges(p)
        g = build_curve_graph(p, res)
        rep = picard_rank(p, res, g, check=False)
        checks.append(_check("rank", rep.rho == rec.expected_rank,
                             f"{rep.rho} vs {rec.expected_rank}"))
        checks.append(_check("matrix", rep.matrix_rank == rep.rho
                             and rep.matrix_dim == rep.rho + 3,
                             f"rank {rep.matrix_rank}, dim {rep.matrix_dim}"))
    except K3PicError as e:
        checks.append(_check("rank", False, f"{type(e).__name__}: {e}"))
        g = rep = None
    try:
        validate_record(rec)
        checks.append(_check("pic", True))
    except FixtureError as e:
        checks.append(_check("pic", False, str(e)))
    mirror_state = "n/a"
    if rec.mirror_expr is not None:
        try:
            v = mirror_check(rec.pic_lattice(), rec.mirror_object())
            mirror_state = "ok" if v.is_pair else "mismatch"
        except K3PicError as e:
            mirror_state = f"error: {e}"
    if worked and rec.id in WORKED and g is not None:
        checks.extend(worked_example_checks(rec, rep.rho, g, budget))
    return {"id": rec.id, "ok": all(c["ok"] for c in checks), "checks": checks,
            "mirror_column": mirror_state}


def _regress_one(payload):
    rec, budget, worked = payload
    return regress_record(rec, budget, worked)


def _parse_only(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise ValidationError(f"bad --only list {text!r}") from None


def cmd_regress(args) -> int:
    try:
        if args.fixtures:
            with open(args.fixtures) as fh:
                recs = parse_fixtures(fh.read())
        else:
            recs = load_fixtures()
    except OSError as e:
        raise FixtureError(str(e)) from None
    only = _parse_only(args.only)
    if only is not None:
        recs = [r for r in recs if r.id in only]
    worked = only is not None
    payload = [(r, args.budget, worked) for r in recs]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_regress_one, payload))
    else:
        results = [_regress_one(p) for p in payload]
    results.sort(key=lambda r: r["id"])
    fails = [r for r in results if not r["ok"]]
    lines = []
    for r in results:
        bad = [c for c in r["checks"] if not c["ok"]]
        status = "PASS" if r["ok"] else "FAIL"
        extra = "; ".join(f"{c['check']}: {c['detail']}" for c in bad)
        lines.append(f"{r['id']:>3}  {status}  mirror column {r['mirror_column']}"
                     + (f"  [{extra}]" if extra else ""))
        if worked:
            for c in r["checks"][3:]:
                lines.append(f"       {'ok ' if c['ok'] else 'BAD'} {c['check']} {c['detail']}")
    rank_pass = sum(1 for r in results if r["checks"] and r["checks"][0]["ok"])
    lines.append(f"rank: {rank_pass}/{len(results)} pass; "
                 f"{len(results) - len(fails)}/{len(results)} rows pass overall")
    _emit({"results": results, "failures": len(fails)}, args.json, "\n".join(lines))
    return EXIT_FAIL if fails else EXIT_OK


# -- entry point ---------------------------------------------------------------

def _budget(text: str) -> Optional[int]:
    return None if text in ("none", "0") else int(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k3pic", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=_budget, default=10 ** 6,
                        help="search step budget ('none' for unbounded)")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP,
                        help="largest discriminant group searched exhaustively")
    sub = ap.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", parents=[common], help="run the full pipeline on weights")
    a.add_argument("weights", type=int, nargs=4)
    a.add_argument("--dot", metavar="PATH", help="write the fibration graph as DOT")
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("polytope", parents=[common], help="Newton polytope statistics")
    p.add_argument("weights", type=int, nargs=4)
    p.set_defaults(func=cmd_polytope)

    r = sub.add_parser("regress", parents=[common], help="check the family table")
    r.add_argument("fixtures", nargs="?", help="fixture JSON (default: shipped table)")
    r.add_argument("--only", metavar="LIST", help="comma-separated family ids")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.set_defaults(func=cmd_regress)

    lt = sub.add_parser("lattice", parents=[common], help="lattice and form tools")
    lt.add_argument("expr", help="lattice expression, [[...]] Gram matrix or form")
    lt.add_argument("subcommand", choices=["disc", "form", "isotropic", "overlattices", "iso"])
    lt.add_argument("other", nargs="?", help="second operand for iso")
    lt.set_defaults(func=cmd_lattice)

    m = sub.add_parser("mirror-scan", parents=[common], help="scan the table for mirror pairs")
    m.add_argument("--fixtures", help="fixture JSON (default: shipped table)")
    m.set_defaults(func=cmd_mirror_scan)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FixtureError as e:
        print(f"fixture error: {e}", file=sys.stderr)
        return EXIT_FIXTURE
    except INPUT_ERRORS as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetExhausted, CapExceeded) as e:
        print(f"search limit: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (K3PicError, AssertionError) as e:
        print(f"internal inconsistency: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
