"""Command-line front end: run every pipeline and emit verification reports.

Reports list named checks; a check with an expected value contributes to
the pass/fail status, an informational check (expected null) does not.
Exit codes: 0 all checks pass, 1 at least one failed, 2 usage or input
error.  Output is deterministic: canonical expression printing and no
timestamps.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field

from projlaplace import appell, presets
from projlaplace.congruence import (
    klein_residual,
    negative_transform,
    plucker,
    positive_transform,
    quad_quad_residuals,
    transform_sequence,
    weingarten,
)
from projlaplace.documents import Document, DocumentError, load_document
from projlaplace.gkz import reduce_to_system
from projlaplace.hyper2 import HyperbolicEq, gauge_transform, laplace_invariants
from projlaplace.rank4 import (
    ConjugateSystem,
    classify,
    connection_form,
    cubic_invariants,
    maurer_cartan_residual,
    transport,
)
from projlaplace.symexpr import ParseError, PowerProduct, VarTable

__all__ = ["main", "run", "Report"]


@dataclass
class Detail:
    name: str
    got: str
    expected: str | None
    passed: bool


@dataclass
class Report:
    command: str
    status: str = "pass"
    details: list = field(default_factory=list)

    def info(self, name: str, got):
        self.details.append(Detail(name=name, got=str(got), expected=None, passed=True))

    def check(self, name: str, got, expected) -> bool:
        ok = str(got) == str(expected)
        self.details.append(Detail(name=name, got=str(got), expected=str(expected), passed=ok))
        if not ok:
            self.status = "fail"
        return ok

    def check_bool(self, name: str, condition: bool, got="", expected=""):
        self.details.append(
            Detail(name=name, got=str(got) if got != "" else str(condition), expected=str(expected) if expected != "" else "True", passed=bool(condition))
        )
        if not condition:
            self.status = "fail"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        obj = {
            "command": report.command,
            "status": report.status,
            "details": [
                {"name": d.name, "got": d.got, "expected": d.expected, "pass": d.passed}
                for d in report.details
            ],
        }
        return json.dumps(obj, indent=2, sort_keys=False) + "\n"
    lines = []
    for d in report.details:
        if d.expected is None:
            lines.append(f"{d.name}: {d.got}")
        else:
            verdict = "PASS" if d.passed else "FAIL"
            lines.append(f"{d.name}: {d.got} (expected {d.expected}) {verdict}")
    lines.append(report.status.upper())
    return "\n".join(lines) + "\n"


class CliError(Exception):
    pass


_GAUGE_RE = re.compile(r"^\((?P<base>.*)\)\^\((?P<exp>.*)\)$")


def _parse_gauge(factors: list[str] | None, table: VarTable) -> PowerProduct | None:
    if not factors:
        return None
    parsed = []
    for text in factors:
        m = _GAUGE_RE.match(text.strip())
        if not m:
            raise CliError(f"gauge factor must look like (base)^(exponent), got {text!r}")
        parsed.append((table.parse(m.group("base")), table.parse(m.group("exp"))))
    return PowerProduct(table, tuple(parsed))


def _load_docs(paths: list[str] | None) -> list[Document]:
    return [load_document(p) for p in (paths or [])]


def _doc_of_kind(docs: list[Document], kinds: tuple[str, ...]) -> Document:
    for doc in docs:
        if doc.kind in kinds:
            return doc
    raise CliError(f"need an input document of kind {' or '.join(kinds)}")


def _hyperbolic_from(args, docs) -> HyperbolicEq:
    if args.preset:
        if args.preset == "epd":
            return presets.epd_preset()
        if args.preset == "harmonic":
            return presets.harmonic_preset()
        if args.preset in ("f2", "f4"):
            return appell.conjugate_form(args.preset.upper()).hyperbolic_part()
        raise CliError(f"preset {args.preset!r} has no hyperbolic equation")
    doc = _doc_of_kind(docs, ("hyperbolic", "conjugate"))
    if doc.kind == "conjugate":
        return doc.value.hyperbolic_part()
    return doc.value


def _conjugate_from(args, docs) -> ConjugateSystem:
    if args.preset:
        if args.preset in ("f2", "f4"):
            return appell.conjugate_form(args.preset.upper())
        raise CliError(f"preset {args.preset!r} has no conjugate system")
    return _doc_of_kind(docs, ("conjugate",)).value


def _classifiable_from(args, docs):
    if args.preset:
        if args.preset in ("f2", "f4"):
            return appell.conjugate_form(args.preset.upper())
        if args.preset == "quadric":
            return presets.quadric_preset()
        if args.preset == "ruled":
            return presets.ruled_preset()
        raise CliError(f"preset {args.preset!r} cannot be classified")
    return _doc_of_kind(docs, ("conjugate", "asymptotic")).value


def _integrable_from(args, docs):
    if args.preset:
        if args.preset in ("f2", "f4"):
            return appell.system(args.preset.upper())
        if args.preset == "quadric":
            return presets.quadric_preset().as_general()
        if args.preset == "ruled":
            return presets.ruled_preset().as_general()
        raise CliError(f"preset {args.preset!r} has no rank-4 system")
    doc = _doc_of_kind(docs, ("general", "conjugate", "asymptotic"))
    value = doc.value
    if doc.kind == "asymptotic":
        return value.as_general()
    return value


def _params_dict(text: str | None) -> dict:
    values = {}
    if text:
        for piece in text.split(","):
            if not piece.strip():
                continue
            key, _, raw = piece.partition("=")
            if not _ or not raw:
                raise CliError(f"bad --params entry {piece!r}, expected name=value")
            values[key.strip()] = float(raw)
    return values


def _signs(sign: str) -> list[str]:
    if sign == "both":
        return ["+", "-"]
    if sign in ("+", "-"):
        return [sign]
    raise CliError(f"--sign must be +, - or both, got {sign!r}")


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def cmd_invariants(args, docs) -> Report:
    report = Report(command="invariants")
    eq = _hyperbolic_from(args, docs)
    inv = laplace_invariants(eq)
    report.info("h", inv.h)
    report.info("k", inv.k)
    report.check("h - k == a_x - b_y", inv.h - inv.k, eq.a.diff(eq.x) - eq.b.diff(eq.y))
    return report


def cmd_gauge(args, docs) -> Report:
    report = Report(command="gauge")
    eq = _hyperbolic_from(args, docs)
    gauge = _parse_gauge(args.gauge_factor, eq.table)
    if gauge is None:
        raise CliError("gauge needs at least one --gauge-factor")
    out = gauge_transform(eq, gauge)
    for name, value in (("a", out.a), ("b", out.b), ("c", out.c)):
        report.info(name, value)
    before = laplace_invariants(eq)
    after = laplace_invariants(out)
    report.check("h invariant", after.h, before.h)
    report.check("k invariant", after.k, before.k)
    return report


def cmd_transform(args, docs) -> Report:
    report = Report(command="transform")
    sys = _conjugate_from(args, docs)
    for sign in _signs(args.sign):
        run = positive_transform if sign == "+" else negative_transform
        result = run(sys)
        out = result.output
        for name in ("a", "b", "c", "q", "m", "n", "r"):
            report.info(f"{sign}:{name}", getattr(out, name))
        inv_in = sys.invariants()
        inv_out = out.invariants()
        if sign == "+":
            report.check(f"{sign}:k(out) == h(in)", inv_out.k, inv_in.h)
        else:
            report.check(f"{sign}:h(out) == k(in)", inv_out.h, inv_in.k)
    return report


def cmd_sequence(args, docs) -> Report:
    report = Report(command="sequence")
    sys = _conjugate_from(args, docs)
    seq = transform_sequence(sys, args.steps)
    previous = sys.invariants()
    for i, step in enumerate(seq):
        inv = step.output.invariants()
        report.info(f"step {i + 1} h", inv.h)
        if args.steps > 0:
            report.check(f"step {i + 1} k == previous h", inv.k, previous.h)
        else:
            report.check(f"step {i + 1} h == previous k", inv.h, previous.k)
        previous = inv
    return report


def cmd_weingarten(args, docs) -> Report:
    report = Report(command="weingarten")
    sys = _conjugate_from(args, docs)
    expect_zero = args.preset in ("f2", "f4")
    for sign in _signs(args.sign):
        value = weingarten(sys, sign)
        if expect_zero:
            report.check(f"W{sign}", value, sys.table.zero)
        else:
            report.info(f"W{sign}", value)
    return report


def cmd_classify(args, docs) -> Report:
    report = Report(command="classify")
    sys = _classifiable_from(args, docs)
    outcome = classify(sys)
    expected = {"quadric": "Quadric", "ruled": "Ruled"}.get(args.preset or "")
    if expected:
        report.check("class", outcome.value, expected)
    else:
        report.info("class", outcome.value)
    if isinstance(sys, ConjugateSystem):
        data = cubic_invariants(sys)
        report.info("A", data.A)
        report.info("B", data.B)
    return report


def cmd_integrability(args, docs) -> Report:
    report = Report(command="integrability")
    sys = _integrable_from(args, docs)
    residual = maurer_cartan_residual(connection_form(sys))
    nonzero = [(i, j) for i in range(4) for j in range(4) if not residual[i][j].is_zero]
    report.check_bool(
        "maurer-cartan residual is zero",
        not nonzero,
        got="zero matrix" if not nonzero else f"nonzero entries {nonzero}",
        expected="zero matrix",
    )
    return report


def cmd_transport(args, docs) -> Report:
    report = Report(command="transport")
    sys = _integrable_from(args, docs)
    if not args.map_x or not args.map_y or not args.coords:
        raise CliError("transport needs --coords, --map-x and --map-y")
    coord_names = tuple(n.strip() for n in args.coords.split(","))
    if len(coord_names) != 2:
        raise CliError("--coords must list exactly two names")
    table = VarTable(coords=coord_names, params=sys.table.params)
    x_map = table.parse(args.map_x)
    y_map = table.parse(args.map_y)
    gauge = _parse_gauge(args.gauge_factor, table)
    out = transport(sys, x_map, y_map, gauge, target=args.target)
    names = ("a", "b", "c", "q", "m", "n", "r") if args.target == "conjugate" else ("ell", "a", "b", "p", "m", "c", "f", "q")
    for name in names:
        report.info(name, getattr(out, name))
    return report


def cmd_gkz_derive(args, docs) -> Report:
    report = Report(command="gkz-derive")
    if args.preset in ("f2", "f4"):
        if args.preset == "f2":
            data, plan, table = presets.f2_gkz_data(), presets.f2_reduction_plan(), appell.F2_TABLE
        else:
            data, plan, table = presets.f4_gkz_data(), presets.f4_reduction_plan(), appell.F4_TABLE
        derived = reduce_to_system(data, plan, table)
        reference = appell.system(args.preset.upper())
        for name in ("ell", "a", "b", "p", "m", "c", "f", "q"):
            report.check(name, getattr(derived, name), getattr(reference, name))
    else:
        gkz_doc = _doc_of_kind(docs, ("gkz",))
        plan_doc = _doc_of_kind(docs, ("plan",))
        derived = reduce_to_system(gkz_doc.value, plan_doc.value, plan_doc.table)
        for name in ("ell", "a", "b", "p", "m", "c", "f", "q"):
            report.info(name, getattr(derived, name))
    return report


def cmd_appell_check(args, docs) -> Report:
    report = Report(command="appell-check")
    values = _params_dict(args.params)
    if args.family == "Gauss":
        point = args.x
    else:
        point = (args.x, args.y)
    residual = appell.pde_residual(args.family, values, point, args.truncation)
    report.check_bool(
        f"residual < {args.tol:g}",
        residual < args.tol,
        got=f"{residual:.3e}",
        expected=f"< {args.tol:g}",
    )
    return report


def cmd_euler_check(args, docs) -> Report:
    report = Report(command="euler-check")
    values = _params_dict(args.params)
    result = appell.euler_transform_check(values, args.s, args.t, tol=args.tol)
    report.info("lhs", f"{result.lhs:.12g}")
    report.info("rhs", f"{result.rhs:.12g}")
    report.check_bool(
        f"|lhs - rhs| < {args.tol:g}",
        result.passed,
        got=f"{result.abs_error:.3e}",
        expected=f"< {args.tol:g}",
    )
    return report


def cmd_quadquad(args, docs) -> Report:
    report = Report(command="quadquad")
    sys = _conjugate_from(args, docs)
    for sign in _signs(args.sign):
        e1, e2 = quad_quad_residuals(sys, sign)
        report.info(f"{sign}:residual 1 identically zero", e1.is_zero)
        report.info(f"{sign}:residual 2 identically zero", e2.is_zero)
    return report


def cmd_plucker(args, docs) -> Report:
    report = Report(command="plucker")
    if not args.coords or not args.p1 or not args.p2:
        raise CliError("plucker needs --coords, --p1 and --p2")
    coord_names = tuple(n.strip() for n in args.coords.split(","))
    table = VarTable(coords=coord_names)
    p1 = [table.parse(part) for part in args.p1.split(";")]
    p2 = [table.parse(part) for part in args.p2.split(";")]
    point = plucker(p1, p2)
    for name, value in zip(("p01", "p02", "p03", "p12", "p13", "p23"), point.components()):
        report.info(name, value)
    report.check("klein relation", klein_residual(point), table.zero)
    return report


_COMMANDS = {
    "invariants": cmd_invariants,
    "gauge": cmd_gauge,
    "transform": cmd_transform,
    "sequence": cmd_sequence,
    "weingarten": cmd_weingarten,
    "classify": cmd_classify,
    "integrability": cmd_integrability,
    "transport": cmd_transport,
    "gkz-derive": cmd_gkz_derive,
    "appell-check": cmd_appell_check,
    "euler-check": cmd_euler_check,
    "quadquad": cmd_quadquad,
    "plucker": cmd_plucker,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projlaplace",
        description="Exact calculus of rank-4 systems: Laplace transforms, "
        "W-congruence tests, and hypergeometric system derivations.",
    )
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
        p.add_argument("--preset", choices=("f2", "f4", "epd", "harmonic", "quadric", "ruled"))
        p.add_argument("--input", action="append", help="JSON document path (repeatable)")
        p.add_argument("--sign", default="both", help="+, - or both")
        p.add_argument("--steps", type=int, default=1)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--params", help="comma-separated name=value parameter floats")
        p.add_argument("--gauge-factor", action="append", help="(base)^(exponent), repeatable")
        p.add_argument("--map-x", help="forward map for the first old coordinate")
        p.add_argument("--map-y", help="forward map for the second old coordinate")
        p.add_argument("--coords", help="comma-separated coordinate names")
        p.add_argument("--p1", help="semicolon-separated 4-vector of expressions")
        p.add_argument("--p2", help="semicolon-separated 4-vector of expressions")
        p.add_argument("--target", choices=("general", "conjugate"), default="conjugate")
        p.add_argument("--family", choices=("F2", "F3", "F4", "Gauss"), default="F2")
        p.add_argument("--truncation", type=int, default=40)
        p.add_argument("--x", type=float, default=0.1)
        p.add_argument("--y", type=float, default=0.2)
        p.add_argument("--s", type=float, default=3.0)
        p.add_argument("--t", type=float, default=2.0)
    return parser


def run(argv: list[str]) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        return 2, parser.format_usage()
    try:
        docs = _load_docs(args.input)
        report = _COMMANDS[args.command](args, docs)
    except (CliError, DocumentError, ParseError, ValueError, ZeroDivisionError, ArithmeticError) as err:
        report = Report(command=args.command, status="error")
        report.details.append(Detail(name="error", got=str(err), expected=None, passed=False))
        return 2, render(report, args.format)
    return (0 if report.status == "pass" else 1), render(report, args.format)


def main() -> None:
    code, text = run(sys.argv[1:])
    sys.stdout.write(text)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
