"""Command-line interface.

One executable, `cantorshift`, with flat commands for digit arithmetic
(expand / evaluate / classify / cylinder / shift / normalize) and two
command groups: `salem` for digit-weight function systems and `gk` for
measure bounds of digit-defined sets.

Conventions:

* rationals are read and written as "num/den" strings;
* results go to stdout as single-line JSON with sorted keys (tables and
  scans emit CSV instead), so identical invocations are byte-identical;
* errors go to stderr as one JSON object {"error": {...}};
* exit codes: 0 success, 1 usage, 2 domain/validation error,
  3 insufficient digits for the requested operation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .errors import DomainError, InsufficientDepthError, InvalidSystemError
from .numeral import (
    DigitString,
    Interval,
    QSequence,
    Tail,
    classify_rationality,
    cylinder_info,
    eval_prefix,
    expand,
    format_rational,
    parse_rational,
)
from .shifts import ShiftProgram, apply_program, gen_shift, normalize_program, shift_n
from .salem import (
    SalemSystem,
    emit_table,
    evaluate,
    integral,
    mc_mean,
    residual,
    validate_system,
)
from .gausskuzmin import (
    GKSetSpec,
    rhs_from_json,
    generator_family,
    limit_scan,
    measure_bounds,
    measure_mc,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Input parsing helpers
# ---------------------------------------------------------------------------

def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON argument: {exc}") from exc


def _parse_q(text: str) -> QSequence:
    try:
        return QSequence.constant(int(text))
    except ValueError:
        pass
    return QSequence.from_json(_json_arg(text))


def _parse_digit_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise DomainError(f"digit list must be comma-separated integers: {text!r}") from exc


def _parse_tail(text: str) -> Tail:
    if text in ("zero", "max"):
        return Tail.from_json(text)
    return Tail.from_json(_json_arg(text))


def _parse_params(text: str) -> list[int]:
    text = text.strip()
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            a, b = int(lo), int(hi)
        except ValueError as exc:
            raise DomainError(f"parameter range must be int:int, got {text!r}") from exc
        if b < a:
            raise DomainError(f"empty parameter range {text!r}")
        return list(range(a, b + 1))
    return list(_parse_digit_list(text))


def _value_json(v):
    if isinstance(v, Interval):
        return {"lo": format_rational(v.lo), "hi": format_rational(v.hi)}
    return format_rational(v)


def _decimal(x: Fraction, digits: int) -> str:
    """Round-half-even decimal rendering, exact to `digits` places."""
    if digits < 1:
        raise DomainError(f"decimal precision must be >= 1, got {digits}")
    sign = "-" if x < 0 else ""
    scaled = round(abs(x) * 10**digits)
    s = str(scaled).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


# ---------------------------------------------------------------------------
# Digit arithmetic commands
# ---------------------------------------------------------------------------

def _cmd_expand(args) -> None:
    x = parse_rational(args.x)
    q = _parse_q(args.q)
    d = expand(x, q, args.depth, probe_limit=args.probe)
    if args.digits:
        print(",".join(str(c) for c in d.prefix))
        return
    _emit({"prefix": list(d.prefix), "tail": d.tail.to_json(),
           "value": _value_json(eval_prefix(d))})


def _cmd_evaluate(args) -> None:
    q = _parse_q(args.q)
    d = DigitString(q, _parse_digit_list(args.prefix), _parse_tail(args.tail))
    _emit({"value": _value_json(eval_prefix(d))})


def _cmd_classify(args) -> None:
    x = parse_rational(args.x)
    q = _parse_q(args.q)
    r = classify_rationality(x, q, probe_depth=args.probe)
    out = {"kind": r.kind, "probe_depth": r.probe_depth}
    if r.zero_form is not None:
        out["zero_form"] = r.zero_form.to_json()
    if r.max_form is not None:
        out["max_form"] = r.max_form.to_json()
    if r.certificate is not None:
        out["certificate"] = r.certificate.to_json()
    _emit(out)


def _cmd_cylinder(args) -> None:
    q = _parse_q(args.q)
    c = cylinder_info(_parse_digit_list(args.digits), q)
    _emit({"digits": list(c.base_digits), "rank": c.rank,
           "inf": format_rational(c.inf), "sup": format_rational(c.sup),
           "measure": format_rational(c.measure)})


def _cmd_shift(args) -> None:
    x = parse_rational(args.x)
    q = _parse_q(args.q)
    if args.n is not None:
        v = shift_n(x, q, args.n)
    elif args.m is not None:
        v = gen_shift(x, q, args.m)
    else:
        program = ShiftProgram.from_json(_json_arg(args.program))
        v = apply_program(program, x, q)
    _emit({"value": format_rational(v)})


def _cmd_normalize(args) -> None:
    program = ShiftProgram.from_json(_json_arg(args.program))
    norm = normalize_program(program)
    _emit({"word": [a.to_json() for a in norm.word],
           "sigma_power": norm.is_sigma_power()})


# ---------------------------------------------------------------------------
# Function-system commands
# ---------------------------------------------------------------------------

def _system(args) -> SalemSystem:
    return SalemSystem.from_json(_json_arg(args.system))


def _cmd_salem_validate(args) -> None:
    report = validate_system(_system(args))
    if report.ok:
        _emit({"ok": True})
    else:
        v = report.violation
        _emit({"ok": False, "violation": {"condition": v.condition,
                                          "where": v.where,
                                          "detail": v.detail}})


def _cmd_salem_eval(args) -> None:
    system = _system(args)
    x = parse_rational(args.x)
    res = evaluate(x, system.q, system, tol=parse_rational(args.tol))
    if args.exact and res.error_bound != 0:
        raise DomainError(
            "exact evaluation unavailable: the input needs series truncation")
    _emit({"value": format_rational(res.value),
           "error_bound": format_rational(res.error_bound),
           "terms": res.terms})


def _cmd_salem_residual(args) -> None:
    system = _system(args)
    x = parse_rational(args.x)
    r = residual(x, system.q, system, args.k, tol=parse_rational(args.tol))
    _emit({"residual": format_rational(r)})


def _cmd_salem_integral(args) -> None:
    _emit({"value": format_rational(integral(_system(args)))})


def _cmd_salem_table(args) -> None:
    system = _system(args)
    grid = args.points if args.points is not None else [
        parse_rational(v) for v in args.grid.split(",")]
    rows = emit_table(system, grid, tol=parse_rational(args.tol))
    if args.exact:
        fmt = format_rational
    else:
        fmt = lambda v: _decimal(v, args.digits)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "g", "err_bound"])
        for row in rows:
            w.writerow([fmt(row.x), fmt(row.value), fmt(row.error_bound)])
    finally:
        if args.out:
            out.close()


def _cmd_salem_mc(args) -> None:
    r = mc_mean(_system(args), args.samples, args.seed)
    _emit({"mean": r.mean, "std_err": r.std_err, "samples": r.samples,
           "seed": r.seed, "terms": r.terms})


# ---------------------------------------------------------------------------
# Measure commands
# ---------------------------------------------------------------------------

def _cmd_gk_bounds(args) -> None:
    spec = GKSetSpec.from_json(_json_arg(args.spec))
    _emit(measure_bounds(spec, args.depth).to_json())


def _cmd_gk_mc(args) -> None:
    spec = GKSetSpec.from_json(_json_arg(args.spec))
    r = measure_mc(spec, args.samples, args.seed, extra_depth=args.extra_depth)
    _emit({"estimate": r.estimate, "std_err": r.std_err, "hits": r.hits,
           "samples": r.samples, "seed": r.seed, "depth": r.depth})


def _cmd_gk_scan(args) -> None:
    q = _parse_q(args.q)
    rule = _json_arg(args.family)
    rhs = rhs_from_json(_json_arg(args.rhs))
    family = generator_family(q, rule, rhs, args.relation)
    params = _parse_params(args.params)
    if args.depth is not None:
        depth_rule = lambda n: args.depth
    else:
        offset = args.depth_offset
        depth_rule = None if offset == 6 else (
            lambda n: family(n).required_depth + offset)
    rows = limit_scan(family, params, depth_rule)
    if args.digits is not None:
        fmt = lambda v: _decimal(v, args.digits)
    else:
        fmt = format_rational
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "lower", "upper", "decided_mass"])
    ok = 0
    for row in rows:
        if row.bounds is None:
            print(json.dumps({"warning": {"param": row.param,
                                          "message": row.error}},
                             sort_keys=True), file=sys.stderr)
            continue
        b = row.bounds
        w.writerow([row.param, fmt(b.lower), fmt(b.upper),
                    fmt(b.decided_mass)])
        ok += 1
    if not ok:
        raise DomainError("no parameter in the scan produced bounds")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOL_DEFAULT = "1/1000000000"


def _build_parser() -> _Parser:
    p = _Parser(prog="cantorshift",
                description="Exact Cantor-series digit arithmetic, shift "
                            "operators, singular functions, measure bounds")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("expand", help="greedy digit expansion of a rational")
    s.add_argument("--x", required=True, help="rational in [0,1], e.g. 5/6")
    s.add_argument("--q", required=True, help="base: integer or JSON")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--probe", type=int, default=None,
                   help="cap on the tail-detection scan")
    s.add_argument("--digits", action="store_true",
                   help="print only the digit list")
    s.set_defaults(func=_cmd_expand)

    s = sub.add_parser("evaluate", help="exact value of a digit string")
    s.add_argument("--q", required=True)
    s.add_argument("--prefix", required=True, help="comma-separated digits")
    s.add_argument("--tail", default="zero",
                   help='"zero", "max", {"periodic": [...]}, {"truncated": n}')
    s.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("classify", help="terminating vs non-terminating expansion")
    s.add_argument("--x", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--probe", type=int, default=None)
    s.set_defaults(func=_cmd_classify)

    s = sub.add_parser("cylinder", help="endpoints and measure of a digit cylinder")
    s.add_argument("--q", required=True)
    s.add_argument("--digits", required=True)
    s.set_defaults(func=_cmd_cylinder)

    s = sub.add_parser("shift", help="shift / digit deletion / program application")
    s.add_argument("--x", required=True)
    s.add_argument("--q", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int, help="apply the left shift n times")
    g.add_argument("--m", type=int, help="delete the m-th digit")
    g.add_argument("--program", help="shift-program JSON")
    s.set_defaults(func=_cmd_shift)

    s = sub.add_parser("normalize", help="rewrite a program to pure shifts when possible")
    s.add_argument("--program", required=True)
    s.set_defaults(func=_cmd_normalize)

    salem = sub.add_parser("salem", help="digit-weight function systems")
    ssub = salem.add_subparsers(dest="salem_command", required=True)

    s = ssub.add_parser("validate", help="check system requirements")
    s.add_argument("--system", required=True, help="system JSON")
    s.set_defaults(func=_cmd_salem_validate)

    s = ssub.add_parser("eval", help="evaluate the system's function")
    s.add_argument("--system", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--tol", default=_TOL_DEFAULT)
    s.add_argument("--exact", action="store_true",
                   help="fail unless the value is closed exactly")
    s.set_defaults(func=_cmd_salem_eval)

    s = ssub.add_parser("residual", help="defect of the k-th self-similarity equation")
    s.add_argument("--system", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--tol", default=_TOL_DEFAULT)
    s.set_defaults(func=_cmd_salem_residual)

    s = ssub.add_parser("integral", help="exact Lebesgue mean")
    s.add_argument("--system", required=True)
    s.set_defaults(func=_cmd_salem_integral)

    s = ssub.add_parser("table", help="CSV table x,g,err_bound over a grid")
    s.add_argument("--system", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--points", type=int, help="uniform grid size (includes 0 and 1)")
    g.add_argument("--grid", help="comma-separated rationals")
    s.add_argument("--tol", default=_TOL_DEFAULT)
    s.add_argument("--digits", type=int, default=12,
                   help="decimal places for the default rendering")
    s.add_argument("--exact", action="store_true",
                   help="print exact num/den instead of decimals")
    s.add_argument("--out", default=None, help="write CSV here instead of stdout")
    s.set_defaults(func=_cmd_salem_table)

    s = ssub.add_parser("mc", help="Monte-Carlo estimate of the mean")
    s.add_argument("--system", required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=_cmd_salem_mc)

    gk = sub.add_parser("gk", help="measure of digit-defined sets")
    gsub = gk.add_subparsers(dest="gk_command", required=True)

    s = gsub.add_parser("bounds", help="exact lower/upper measure bounds")
    s.add_argument("--spec", required=True, help="set spec JSON")
    s.add_argument("--depth", type=int, required=True)
    s.set_defaults(func=_cmd_gk_bounds)

    s = gsub.add_parser("mc", help="sampling estimate of the measure")
    s.add_argument("--spec", required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--extra-depth", type=int, default=32)
    s.set_defaults(func=_cmd_gk_mc)

    s = gsub.add_parser("scan", help="CSV bounds over a family parameter")
    s.add_argument("--q", required=True)
    s.add_argument("--family", required=True, help="generator rule JSON")
    s.add_argument("--rhs", required=True, help="threshold JSON")
    s.add_argument("--relation", default="lt", choices=["lt", "ge"])
    s.add_argument("--params", required=True, help='"a:b" range or comma list')
    s.add_argument("--depth", type=int, default=None, help="fixed depth for all rows")
    s.add_argument("--depth-offset", type=int, default=6,
                   help="depth = digits consumed + offset")
    s.add_argument("--digits", type=int, default=None,
                   help="print decimals with this precision instead of num/den")
    s.set_defaults(func=_cmd_gk_scan)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except _UsageError as exc:
        print(json.dumps({"error": {"type": "usage", "message": str(exc)}},
                         sort_keys=True), file=sys.stderr)
        return 1
    except InsufficientDepthError as exc:
        err = {"type": "insufficient-depth", "message": str(exc)}
        if exc.required is not None:
            err["required"] = exc.required
        print(json.dumps({"error": err}, sort_keys=True), file=sys.stderr)
        return 3
    except InvalidSystemError as exc:
        err = {"type": "invalid-system", "message": str(exc)}
        if exc.report is not None and exc.report.violation is not None:
            v = exc.report.violation
            err["violation"] = {"condition": v.condition, "where": v.where,
                                "detail": v.detail}
        print(json.dumps({"error": err}, sort_keys=True), file=sys.stderr)
        return 2
    except ValueError as exc:  # DomainError and stray parse errors
        print(json.dumps({"error": {"type": "domain", "message": str(exc)}},
                         sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
