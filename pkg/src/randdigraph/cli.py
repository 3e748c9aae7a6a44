"""Command-line front end.

Every subcommand prints one result record (``--format json``, the
default), CSV rows with a versioned header comment (``--format csv``) or
aligned ``key: value`` lines (``--format text``).

Exit codes: 0 when the result carries no warning, 1 for usage errors,
2 for numerical failures and for results that come with warnings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import __version__
from .airy import ai_general, ai_root
from .airy_integrals import airy_table_I, elementary_critical, phi_rd, residue_sum, varphi
from .asymptotics import asym_probability, constants, convergence_rows, fit_slope
from .deformed_exp import EntireFnSpec, GGFKind, find_root, phi_eval
from .families import FamilySpec, ModelKind, WindowP, probability_exact_certified
from .oracle import census, exact_poly, md_probability_capped
from .scalar_core import PRECISION_ENV_VAR, DomainError, NumericalFailure, workprec
from .strong_counts import VARIANTS, a_r_polynomial, e_r, s_r

CSV_SCHEMA = 1
TABLE_IDS = ("airy_values", "airy_I", "mdag", "elementary", "bicyclic", "simple_elementary")
TABLE_MUS = (-3, -2, -1, 0, 1, 2, 3)
AIRY_I_MUS = (-4, -3, -2, -1, 0, 1, 2, 3, 4)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- formatting ----------------------------------------------------------------


def truncate_digits(x, digits: int) -> str:
    """``x`` cut (not rounded) to ``digits`` significant digits."""
    x = mpmath.mpmathify(x)
    if x == 0:
        return "0"
    digits = max(1, digits)
    with workprec(int(digits * 3.4) + 64):
        e = int(mpmath.floor(mpmath.log10(abs(x))))
        scaled = abs(x) / mpf(10) ** (e - digits + 1)
        mant = int(mpmath.floor(scaled + mpf(10) ** -(digits + 5)))
    if mant >= 10**digits:
        mant //= 10
        e += 1
    sign = "-" if x < 0 else ""
    text = str(mant)
    if -5 <= e < digits + 1:
        if e >= digits - 1:
            return sign + text + "0" * (e - digits + 1)
        if e >= 0:
            return sign + text[: e + 1] + "." + text[e + 1 :]
        return sign + "0." + "0" * (-e - 1) + text
    return f"{sign}{text[0]}.{text[1:]}e{e:+d}" if digits > 1 else f"{sign}{text}e{e:+d}"


def _num(x, digits: int) -> str:
    return truncate_digits(x, digits)


def _emit(record: dict, fmt: str, rows: list[dict] | None = None, comments: list[str] | None = None) -> str:
    if fmt == "json":
        payload = dict(record)
        if rows is not None:
            payload["rows"] = rows
        return json.dumps(payload, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# randdigraph csv schema {CSV_SCHEMA} ({record.get('command', '')})\n")
        for c in comments or []:
            buf.write(f"# {c}\n")
        table = rows if rows is not None else [{k: v for k, v in record.items() if not isinstance(v, (list, dict))}]
        if table:
            writer = csv.DictWriter(buf, fieldnames=list(table[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in table:
                writer.writerow(row)
        return buf.getvalue().rstrip("\n")
    lines = []
    for k, v in record.items():
        if isinstance(v, (list, dict)):
            v = json.dumps(v)
        lines.append(f"{k}: {v}")
    for row in rows or []:
        lines.append("  ".join(f"{k}={v}" for k, v in row.items()))
    return "\n".join(lines)


# -- argument helpers --------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma separated list of integers, got {text!r}") from exc


def _family(args) -> FamilySpec:
    try:
        if args.family in ("kernel", "excess"):
            return FamilySpec.parse(args.family, args.r, args.d)
        return FamilySpec.parse(args.family)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _probability_argument(args):
    given = [x is not None for x in (args.p, args.lam, args.mu)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --p, --lambda, --mu")
    if args.p is not None:
        return _fraction(args.p)
    if args.lam is not None:
        return _fraction(args.lam) / args.n
    return WindowP(args.n, _fraction(args.mu))


def _p_value(p, bits: int = 128):
    if isinstance(p, WindowP):
        return p(bits)
    return p


def _cbrt(n: int):
    return mpmath.cbrt(n)


# -- commands ------------------------------------------------------------------


def cmd_prob(args) -> tuple[dict, list | None, list]:
    model = ModelKind.parse(args.model)
    family = _family(args)
    try:
        family.check_model(model)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    p = _probability_argument(args)
    warnings: list[str] = []
    record = {
        "command": "prob",
        "family": str(family),
        "model": model,
        "n": args.n,
        "p": _num(_p_value(p), 15) if isinstance(p, WindowP) else str(p),
        "method": args.method,
    }
    if args.method == "exact":
        res = probability_exact_certified(family, model, args.n, p, args.digits)
        value, digits = res.value, min(res.digits, args.digits)
    elif args.method == "asym":
        res = asym_probability(family, model, args.n, _p_value(p), args.regime)
        value, digits = res.value, args.digits
        warnings.extend(res.warnings)
        record["regime"] = res.regime.tag
    else:
        value, digits = _oracle_value(family, model, args.n, p, args.digits, warnings)
    record["value"] = _num(value, digits)
    record["value_times_n_cbrt"] = _num(value * _cbrt(args.n), digits)
    record["digits"] = digits
    record["warnings"] = warnings
    return record, None, warnings


def _oracle_value(family, model, n, p, digits, warnings):
    if model == ModelKind.MD:
        if n > 3:
            raise UsageError("the MD oracle covers n <= 3")
        value, tail = md_probability_capped(n, _p_value(p, 256), family, 20, 256)
        if tail > mpf(10) ** -digits * abs(value):
            warnings.append(f"tail bound {mpmath.nstr(tail, 3)} limits the certified digits")
            digits = max(1, int(-mpmath.log10(tail / abs(value)))) if value else 1
        return value, digits
    if n > 5:
        raise UsageError("the enumeration oracle covers n <= 5")
    poly = exact_poly(n, model, family)
    pv = p if isinstance(p, Fraction) else _p_value(p, 256)
    acc = 0
    for c in reversed(poly):
        acc = acc * pv + c
    if isinstance(acc, Fraction):
        return mpf(acc.numerator) / acc.denominator, digits
    return acc, digits


def _table_airy_values(args):
    rows = []
    a1p = ai_root(1, True, 128)
    for k in range(0, 11):
        v = ai_general(-k, a1p, 128) * (-1) ** k
        rows.append({"n": k, "value": _num(v, 10)})
    return rows


def _table_airy_I(args):
    rows = []
    tol = mpf(10) ** -(args.digits + 3)
    for k in range(0, 11):
        row = {"n": k}
        for mu in AIRY_I_MUS:
            row[f"mu={mu}"] = _num(airy_table_I(k, mu, tol, 96), args.digits)
        rows.append(row)
    return rows


def _window_row(family, model, n, digits, scale):
    row = {"n": n}
    for mu in TABLE_MUS:
        res = probability_exact_certified(family, model, n, WindowP(n, Fraction(mu)), digits)
        v = res.value * (_cbrt(n) if scale else 1)
        row[f"mu={mu}"] = _num(v, min(digits, res.digits))
    return row


def _limit_row(fn, digits):
    row = {"n": "inf"}
    tol = mpf(10) ** -(digits + 3)
    for mu in TABLE_MUS:
        row[f"mu={mu}"] = _num(fn(mu, tol), digits)
    return row


def _table_window(args, family, scale, limit):
    rows = [_window_row(family, ModelKind.MD, n, args.digits, scale) for n in args.n_list]
    rows.append(_limit_row(limit, args.digits))
    return rows


def _table_simple(args):
    rows = []
    for n in args.n_list:
        row = {"n": n}
        for model in (ModelKind.SD, ModelKind.D2, ModelKind.MD):
            res = probability_exact_certified(FamilySpec.elementary(), model, n, Fraction(1, n), args.digits)
            row[model] = _num(res.value, min(args.digits, res.digits))
        rows.append(row)
    lim = _num(elementary_critical(0, mpf(10) ** -(args.digits + 3)), args.digits)
    rows.append({"n": "inf", ModelKind.SD: lim, ModelKind.D2: lim, ModelKind.MD: lim})
    return rows


def cmd_table(args):
    if args.id == "airy_values":
        rows = _table_airy_values(args)
    elif args.id == "airy_I":
        rows = _table_airy_I(args)
    elif args.id == "mdag":
        rows = _table_window(args, FamilySpec.acyclic(), True, lambda mu, tol: varphi(mu, tol, 96))
    elif args.id == "elementary":
        rows = _table_window(args, FamilySpec.elementary(), False, lambda mu, tol: elementary_critical(mu, tol, 96))
    elif args.id == "bicyclic":
        rows = _table_window(args, FamilySpec.bicyclic(), False, lambda mu, tol: phi_rd(1, 0, mu, tol, 96) / 2)
    else:
        rows = _table_simple(args)
    return {"command": "table", "id": args.id}, rows, []


def cmd_convergence(args):
    model = ModelKind.parse(args.model)
    family = _family(args)
    lam = _fraction(args.lam)
    warnings = []
    if abs(lam - 1) < Fraction(1, 10):
        warnings.append("lambda is close to 1: the fixed-lambda formulas converge slowly here")
    try:
        rows = convergence_rows(family, model, lam, args.n_list, args.digits)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    slope = fit_slope(rows) if len(rows) >= 2 else float("nan")
    expected = -1.0 if lam < 1 else -1 / 3
    out = [
        {
            "n": r.n,
            "exact": _num(r.exact, args.digits),
            "asym": _num(r.asym, args.digits),
            "log_abs_ratio_minus_one": f"{r.log_abs_ratio_minus_one:.6f}",
        }
        for r in rows
    ]
    record = {
        "command": "convergence",
        "family": str(family),
        "model": model,
        "lambda": str(lam),
        "slope": f"{slope:.6f}",
        "expected_slope": f"{expected:.6f}",
        "warnings": warnings,
    }
    return record, out, warnings


_NAMED_POINTS = {"a1": (False,), "a1prime": (True,), "a1'": (True,)}


def _airy_point(text: str):
    key = text.lower()
    if key in _NAMED_POINTS:
        return ai_root(1, _NAMED_POINTS[key][0], 160)
    if key.startswith("a") and key[1:].isdigit():
        return ai_root(int(key[1:]), False, 160)
    try:
        return mpmath.mpmathify(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot read Airy argument {text!r}") from exc


def cmd_airy(args):
    z = _airy_point(args.z)
    v = ai_general(args.k, z, 160)
    return {
        "command": "airy",
        "k": args.k,
        "z": _num(mpmath.re(z), 15) if not isinstance(z, mpmath.mpc) else str(z),
        "value": _num(v, args.digits) if not isinstance(v, mpmath.mpc) else str(v),
    }, None, []


def cmd_integral(args):
    tol = mpf(10) ** -(args.digits + 3)
    mu = mpmath.mpmathify(args.mu)
    warnings = []
    record = {"command": "integral", "kind": args.kind, "mu": args.mu}
    if args.residue:
        kind = {"varphi": "acyclic", "elementary": "elementary"}.get(args.kind)
        if kind is None:
            raise UsageError("--residue is available for varphi and elementary only")
        if mu <= 0:
            raise UsageError("the residue expansion needs mu > 0")
        value, tail = residue_sum(kind, mu, args.terms)
        record["tail_estimate"] = mpmath.nstr(tail, 3)
    elif args.kind == "varphi":
        value = varphi(mu, tol)
    elif args.kind == "elementary":
        value = elementary_critical(mu, tol)
    elif args.kind == "phi_rd":
        value = phi_rd(args.r, args.d, mu, tol)
        record.update(r=args.r, d=args.d)
    else:
        value = airy_table_I(args.n, mu, tol)
        record["n"] = args.n
    record["value"] = _num(value, args.digits)
    return record, None, warnings


def cmd_roots(args):
    kind = GGFKind.parse(args.kind)
    root = find_root(args.j, _fraction(args.w), args.r01, EntireFnSpec.one(), kind, args.digits + 4)
    return {
        "command": "roots",
        "j": args.j,
        "w": args.w,
        "kind": kind,
        "r": args.r01,
        "value": _num(root, args.digits),
    }, None, []


def cmd_strong(args):
    r = args.r
    record = {"command": "strong", "r": r, "s_r": str(s_r(r)), "e_r": str(e_r(r))}
    rows = []
    for variant in VARIANTS if args.variant == "all" else (args.variant,):
        poly = a_r_polynomial(r, variant)
        rows.append(
            {
                "variant": variant,
                "degree": poly.degree,
                "A_r(1)": str(poly.value(Fraction(1))),
                "coefficients": " ".join(str(c) for c in poly.coeffs[: poly.degree + 1]),
            }
        )
    return record, rows, []


def cmd_oracle(args):
    model = ModelKind.parse(args.model)
    if model == ModelKind.MD:
        raise UsageError("the census covers the D2 and SD models")
    if args.n > 5:
        raise UsageError("the census covers n <= 5")
    if args.family:
        family = _family(args)
        poly = exact_poly(args.n, model, family)
        rows = [{"power": i, "coefficient": str(c)} for i, c in enumerate(poly) if c]
        return {"command": "oracle", "n": args.n, "model": model, "family": str(family)}, rows, []
    cen = census(args.n, model)
    rows = [{"n": n, "m": m, "family": fam, "count": c} for n, m, fam, c in cen.rows()]
    return {"command": "oracle", "n": args.n, "model": model}, rows, []


def cmd_phi(args):
    kind = GGFKind.parse(args.kind)
    F = EntireFnSpec.exp_ck(args.ck) if args.ck else EntireFnSpec.one()
    v = phi_eval(mpmath.mpmathify(args.z), _fraction(args.w), args.r, F, kind, digits=args.digits + 4)
    return {
        "command": "phi",
        "z": args.z,
        "w": args.w,
        "r": args.r,
        "kind": kind,
        "F": F.describe(),
        "value": _num(v, args.digits),
    }, None, []


def cmd_constant(args):
    v = constants(args.name, _fraction(args.lam), args.model, args.r, args.d)
    return {"command": "constant", "name": args.name, "lambda": args.lam, "value": _num(v, args.digits)}, None, []


# -- parser ------------------------------------------------------------------


def _add_family(p, default="acyclic"):
    p.add_argument("--family", default=default, choices=["acyclic", "elementary", "bicyclic", "kernel", "excess"])
    p.add_argument("--model", default="MD", type=str.upper, choices=list(ModelKind.ALL))
    p.add_argument("--r", type=int, default=None, help="excess (kernel and excess families)")
    p.add_argument("--d", type=int, default=None, help="deficiency (kernel family)")


def _common(defaults: bool) -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand."""
    p = _Parser(add_help=False)
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    p.add_argument("--format", choices=["json", "csv", "text"], **kw("json"))
    p.add_argument("--precision", type=int, help=f"default working bits (also {PRECISION_ENV_VAR})", **kw(None))
    p.add_argument("--digits", type=int, help="target decimal digits", **kw(8))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="randdigraph",
        description="Random digraph phase transition probabilities.",
        parents=[_common(True)],
    )
    parser.add_argument("--version", action="version", version=f"randdigraph {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub_add = sub.add_parser

    def add_parser(name, **kw):
        return sub_add(name, parents=[_common(False)], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("prob", help="probability of a family")
    _add_family(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", default=None)
    p.add_argument("--lambda", dest="lam", default=None)
    p.add_argument("--mu", default=None)
    p.add_argument("--method", default="exact", choices=["exact", "asym", "oracle"])
    p.add_argument("--regime", default="auto", choices=["auto", "subcritical", "critical", "supercritical"])
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("table", help="reproduce a numerical table")
    p.add_argument("--id", required=True, choices=TABLE_IDS)
    p.add_argument("--n-list", type=_int_list, default=[100, 1000])
    p.set_defaults(func=cmd_table, digits_default=5)

    p = sub.add_parser("convergence", help="exact against asymptotic probabilities")
    _add_family(p)
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--n-list", type=_int_list, default=[250, 500, 1000, 2000])
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("airy", help="generalized Airy function Ai(k; z)")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--z", required=True, help="number, a1, a1prime or aJ for the J-th zero of Ai")
    p.set_defaults(func=cmd_airy)

    p = sub.add_parser("integral", help="critical-window Airy integrals")
    p.add_argument("--kind", default="varphi", choices=["varphi", "elementary", "phi_rd", "I"])
    p.add_argument("--mu", default="0")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--n", type=int, default=2, help="index of I(n, mu)")
    p.add_argument("--residue", action="store_true", help="use the residue expansion (mu > 0)")
    p.add_argument("--terms", type=int, default=30)
    p.set_defaults(func=cmd_integral)

    p = sub.add_parser("roots", help="positive roots of deformed exponentials")
    p.add_argument("--w", required=True)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--r01", type=int, default=0, choices=[0, 1])
    p.add_argument("--kind", default="multigraphic")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("strong", help="strongly connected counting constants")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--variant", default="all", choices=["all", *VARIANTS])
    p.set_defaults(func=cmd_strong)

    p = sub.add_parser("oracle", help="exhaustive enumeration of small digraphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--model", default="D2", type=str.upper, choices=list(ModelKind.ALL))
    p.add_argument("--family", default=None, choices=["acyclic", "elementary", "bicyclic", "excess"])
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("phi", help="deformed exponential value")
    p.add_argument("--z", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--ck", type=int, default=0, help="use F = exp(C_k) instead of F = 1")
    p.add_argument("--kind", default="multigraphic")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("constant", help="asymptotic constants (alpha, gamma2, sigma2, ...)")
    p.add_argument("--name", required=True)
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--model", default="MD", type=str.upper, choices=list(ModelKind.ALL))
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=0)
    p.set_defaults(func=cmd_constant)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if "--digits" not in argv and hasattr(args, "digits_default"):
            args.digits = args.digits_default
        if args.digits < 1:
            raise UsageError("--digits must be at least 1")
        if args.precision is not None:
            if args.precision < 64:
                raise UsageError("--precision must be at least 64")
            os.environ[PRECISION_ENV_VAR] = str(args.precision)
        record, rows, warnings = args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 1
    except (DomainError, ValueError) as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return 2
    comments = []
    if record.get("command") == "convergence":
        comments.append(f"fitted slope {record['slope']} (expected {record['expected_slope']})")
    for w in warnings:
        comments.append(f"warning: {w}")
    print(_emit(record, args.format, rows, comments))
    return 2 if warnings else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
