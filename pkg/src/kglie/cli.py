"""Command-line front end.

Exit codes: 0 check passed, 1 check failed, 2 usage or parse error,
3 the sampling domain was exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

from .expr import ParseError, SamplingExhausted, configure, format_rational, parse
from .vfield import parse_vf

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_SAMPLING = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        e = parse(text)
    except ParseError as err:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r} ({err})") from None
    if not e.is_number:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")
    return e.value


def _json_default(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    raise TypeError(type(value).__name__)


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default, ensure_ascii=False)


def _emit(args, data, text: str) -> None:
    print(_dump(data) if args.format == "json" else text)


# ---------------------------------------------------------------- commands


def cmd_check_symmetry(args) -> int:
    from .symcheck import classifying_residual, is_symmetry

    f = parse(args.f)
    q = parse_vf(args.Q)
    residual = classifying_residual(f, q)
    ok = is_symmetry(f, q)
    from .expr import current

    data = {
        "f": f.render(),
        "Q": str(q),
        "residual": residual.render(),
        "symmetry": ok,
        "trials": current().trials,
        "seed": current().seed,
    }
    verdict = "symmetry" if ok else "not a symmetry"
    _emit(args, data, f"residual: {residual.render()}\n{verdict} ({current().trials} samples, seed {current().seed})")
    return EXIT_OK if ok else EXIT_FALSE


def _case_text(report: dict) -> str:
    lines = [f"{report['case']}: {'PASS' if report['passed'] else 'FAIL'}  f = {report['f']}"]
    for c in report["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        detail = f"  ({c['detail']})" if c.get("detail") else ""
        lines.append(f"  [{mark}] {c['check']}{detail}")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    from . import catalog

    reports = []
    text = []
    if args.case is not None:
        cid = args.case
        try:
            if cid in catalog.MAIN_CASES:
                if cid in catalog.PARAM_SAMPLES and args.q is None and args.p is None:
                    name, values = catalog.PARAM_SAMPLES[cid]
                    records = [catalog.get_case(cid, **{name: v}) for v in values]
                else:
                    records = [catalog.get_case(cid, q=args.q, p=args.p)]
            elif cid in catalog.VARIANTS:
                records = [catalog.get_variant(cid, q=args.q if cid == "8'a" else None)]
            else:
                raise catalog.ParameterError(f"unknown case {cid!r}")
        except catalog.ParameterError as err:
            raise UsageError(str(err)) from None
        for rec in records:
            rep = catalog.verify_record(rec)
            reports.append(rep)
            text.append(_case_text(rep))
    if args.k2:
        rep = catalog.verify_k2()
        finite = {c["case"].split("_")[0] for c in rep["cases"] if "13" not in c["case"]}
        reports.append(rep)
        text.extend(_case_text(c) for c in rep["cases"])
        for a in rep["admissible"]:
            text.append(f"{a['record']}: {'PASS' if a['passed'] else 'FAIL'}  {a['transform']}")
        for e in rep["equivalences"]:
            text.append(f"{e['transform']}: {e['source']} -> {e['target']}: {'PASS' if e['passed'] else 'FAIL'}")
        labels = {a["record"] for a in rep["admissible"]}
        text.append(f"{len(finite)} finite case records + Case 13 schema, {len(labels)} admissible records")
    if args.reductions:
        for r in catalog.reductions():
            ok = catalog.verify_reduction(r)
            reports.append({"reduction": r.label, "omega": r.omega.render(), "rhs": r.rhs.render(), "passed": ok})
            text.append(f"reduction {r.label}: {'PASS' if ok else 'FAIL'}  w = {r.omega.render()}, phi'' = {r.rhs.render()}")
    if args.limits:
        tests = {"8->5": Fraction(3), "2->1": Fraction(1, 2), "7->10": Fraction(1)}
        for rec in catalog.limit_records():
            rep = catalog.verify_limit(rec, tests[rec.label])
            reports.append(rep)
            lines = [f"limit {rec.label}: {'PASS' if rep['passed'] else 'FAIL'} (q = {rep['q_test']})"]
            for c in rep["checks"]:
                detail = f"  ({c['detail']})" if c.get("detail") else ""
                lines.append(f"  [{'ok  ' if c['passed'] else 'FAIL'}] {c['check']}{detail}")
            text.append("\n".join(lines))
    if not reports:
        raise UsageError("verify needs --case, --k2, --reductions or --limits")
    passed = all(r["passed"] for r in reports)
    _emit(args, {"passed": passed, "reports": reports}, "\n".join(text))
    return EXIT_OK if passed else EXIT_FALSE


def cmd_invariants(args) -> int:
    from .invariants import InvalidSubalgebra, parse_algebra, tuple12

    try:
        with open(args.algebra, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(str(err)) from None
    algebra = parse_algebra(text, label=args.algebra)
    try:
        algebra.validate()
    except InvalidSubalgebra as err:
        _emit(args, {"valid": False, "error": str(err)}, f"invalid subalgebra: {err}")
        return EXIT_FALSE
    inv = tuple12(algebra)
    five = "(" + ",".join("∞" if v == float("inf") else str(v) for v in inv.tuple5) + ")"
    data = {"valid": True, "tuple12": inv.to_json(), "tuple5": list(inv.tuple5), "dimension": algebra.n}
    _emit(args, data, f"{inv}\n(n,r3,r2,j1,k) = {five}")
    return EXIT_OK


def cmd_hasse(args) -> int:
    from .poset import catalog_nodes, dot_export, hasse, json_export

    h = hasse(catalog_nodes())
    if args.json or args.format == "json":
        print(json_export(h))
    else:
        sys.stdout.write(dot_export(h))
    return EXIT_OK


def cmd_detect(args) -> int:
    from .symcheck import TemplateError, classify_extension, detect_template

    if args.case not in (5, 6, 7, 8, 9):
        raise UsageError("detection covers cases 5 to 9")
    if args.case == 7 and (args.q is None or args.q == 0):
        raise UsageError("case 7 needs a nonzero --q")
    fhat = parse(args.fhat)
    try:
        sol = detect_template(fhat)
    except TemplateError as err:
        raise UsageError(str(err)) from None
    report = classify_extension(args.case, args.q, sol)
    if report["extension"]:
        verdict = f"extension → Case {report['target_case']}"
        if report["p"] is not None:
            verdict += f" (p = {report['p']})"
    else:
        verdict = "no extension"
    basis = "; ".join("(" + ", ".join(v) + ")" if sol.exact else str(v) for v in sol.to_json()) or "empty"
    _emit(args, report, f"Case {report['case']}: template space {basis}\n{verdict}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="sampling seed (KGLIE_SEED overrides)")
    common.add_argument("--trials", type=int, default=None, help="zero-test samples (default 25)")
    common.add_argument("--precision", type=int, default=None, help="working precision in bits (default 256)")
    common.add_argument("--tolerance", type=float, default=None, help="relative zero tolerance (default 1e-9)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="kglie", description="Lie symmetries of u_tx = f(t, x, u).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-symmetry", parents=[common], help="test one vector field against f")
    p.add_argument("--f", required=True, help="arbitrary element f(t, x, u)")
    p.add_argument("--Q", required=True, help="vector field, e.g. 'Dt(t)+Z(-x)'")
    p.set_defaults(handler=cmd_check_symmetry)

    p = sub.add_parser("verify", parents=[common], help="re-derive catalog records")
    p.add_argument("--case", help="case label, e.g. 7 or 8'a")
    p.add_argument("--q", type=_rational)
    p.add_argument("--p", type=_rational)
    p.add_argument("--k2", action="store_true", help="subclass f = F(x - t, u) and its admissible transformations")
    p.add_argument("--reductions", action="store_true", help="Lie reductions of the sl(2) case")
    p.add_argument("--limits", action="store_true", help="limit processes between cases")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("invariants", parents=[common], help="twelve invariants of an algebra file")
    p.add_argument("--algebra", required=True, help="file with one vector field per line")
    p.set_defaults(handler=cmd_invariants)

    p = sub.add_parser("hasse", parents=[common], help="Hasse diagram of the extension order")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--dot", action="store_true", help="DOT output (default)")
    group.add_argument("--json", action="store_true", help="JSON edge list")
    p.set_defaults(handler=cmd_hasse)

    p = sub.add_parser("detect", parents=[common], help="further extensions of cases 5-9")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--q", type=_rational)
    p.add_argument("--fhat", required=True, help="concrete Fhat(w)")
    p.set_defaults(handler=cmd_detect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    settings = {}
    seed = os.environ.get("KGLIE_SEED")
    if seed is not None:
        try:
            settings["seed"] = int(seed)
        except ValueError:
            print(f"kglie: KGLIE_SEED must be an integer, got {seed!r}", file=sys.stderr)
            return EXIT_USAGE
    elif args.seed is not None:
        settings["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            print("kglie: --trials must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        settings["trials"] = args.trials
    if args.precision is not None:
        if args.precision < 64:
            print("kglie: --precision must be at least 64", file=sys.stderr)
            return EXIT_USAGE
        settings["precision"] = args.precision
    if args.tolerance is not None:
        settings["tolerance"] = args.tolerance
    previous = configure(**settings)
    try:
        return args.handler(args)
    except ParseError as err:
        print(f"kglie: parse error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as err:
        print(f"kglie: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SamplingExhausted as err:
        print(f"kglie: sampling domain exhausted: {err}", file=sys.stderr)
        return EXIT_SAMPLING
    finally:
        configure(**previous.__dict__)


if __name__ == "__main__":
    sys.exit(main())
