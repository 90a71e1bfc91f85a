"""Command-line front end: ``resum <subcommand> [flags]``.

Exit status is 0 on success, 2 when an argument fails validation and 1 when a
numerical step fails; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import axioms, borel_engine, exact_oracle, truncation, unfolding
from .errors import PreconditionError, ResumError
from .series_core import FormalSeries, borel_transform, euler_formal_coeffs


class UsageError(Exception):
    """Raised for flag values that fail validation (exit status 2)."""


# ---- g grammar ----------------------------------------------------------------------

_FACTOR = re.compile(r"(\d+(?:\.\d*)?(?:/\d+)?|\.\d+|eps|x(?:\^\d+)?)")


def parse_polynomial(text: str, eps: Optional[float] = None) -> FormalSeries:
    """Parse a sum of monomials such as ``"x + x^2 - eps"`` or ``"3/2*x^3 - 0.5x"``.

    A term is a product of factors, each a decimal or rational number, the atom
    ``eps`` or a power ``x^n``. Returns an offset-0 series.
    """
    src = text.replace(" ", "")
    if not src:
        raise UsageError("empty polynomial")
    if src[0] not in "+-":
        src = "+" + src
    terms = re.findall(r"[+-][^+-]*", src)
    if "".join(terms) != src:
        raise UsageError(f"cannot parse {text!r}")
    coeffs: dict[int, float] = {}
    for term in terms:
        pieces = []
        for chunk in term[1:].split("*"):
            found = _FACTOR.findall(chunk)
            if not chunk or "".join(found) != chunk:
                raise UsageError(f"cannot parse term {term!r}; use c*x^n with decimal or rational c")
            pieces.extend(found)
        c, power = -1.0 if term[0] == "-" else 1.0, 0
        for p in pieces:
            if p == "eps":
                if eps is None:
                    raise UsageError("'eps' used but no --eps given")
                c *= eps
            elif p.startswith("x"):
                power += int(p[2:]) if "^" in p else 1
            else:
                try:
                    c *= float(Fraction(p))
                except (ValueError, ZeroDivisionError):
                    raise UsageError(f"bad number {p!r}") from None
        coeffs[power] = coeffs.get(power, 0.0) + c
    a = np.zeros(max(coeffs) + 1)
    for k, v in coeffs.items():
        a[k] = v
    return FormalSeries(0, a, text)


def _load_series(path: str) -> FormalSeries:
    try:
        with open(path) as fh:
            return FormalSeries.from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read series from {path}: {exc}") from None


def _g_for(args, eps: Optional[float]) -> FormalSeries:
    if args.g_file:
        g = _load_series(args.g_file)
        if g.offset == 1:
            g = FormalSeries(0, np.concatenate([[0], g.coeffs]), g.label)
        return g
    return parse_polynomial(args.g, eps)


# ---- output helpers -----------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _positive(name):
    def conv(text):
        v = float(text)
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{name} must be a positive number")
        return v

    return conv


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# ---- subcommands --------------------------------------------------------------------


def cmd_euler_table(args) -> str:
    if not 0 < args.x_min <= args.x_max:
        raise UsageError("need 0 < --x-min <= --x-max")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    xs = np.linspace(args.x_min, args.x_max, args.n)
    rows = []
    for x in xs:
        x = float(x)
        lap = exact_oracle.euler_exact(x, "laplace", args.tol).value.real
        direct = exact_oracle.euler_exact(x, "direct", args.tol).value.real
        row = {"x": x, "f_laplace": lap, "f_direct": direct}
        if x <= 1:
            rep = truncation.optimal_report(x, args.tol)
            row.update(k_opt=rep.k, bound=rep.bound, actual_error=rep.actual_error, superasymptotic=rep.superasymptotic)
        rows.append(row)
    if args.format == "json":
        return json.dumps({"rows": rows})
    header = ("x", "f_laplace", "f_direct", "k_opt", "bound", "actual_error", "superasymptotic")
    return _csv(header, [[repr(r.get(h)) if r.get(h) is not None else "" for h in header] for r in rows])


def cmd_truncate(args) -> str:
    reps = truncation.truncation_sweep(args.x, args.k_max, args.tol)
    if args.format == "json":
        return json.dumps(
            {
                "x": args.x,
                "optimal_k": truncation.optimal_k(args.x) if args.x <= 1 else None,
                "rows": [
                    {
                        "k": r.k,
                        "partial_sum": _c(r.partial_sum),
                        "bound": r.bound,
                        "actual_error": r.actual_error,
                        "remainder_integral": r.remainder_integral,
                        "identity_defect": r.identity_defect,
                    }
                    for r in reps
                ],
            }
        )
    return truncation.reports_to_csv(reps)


def _series(args) -> FormalSeries:
    return _load_series(args.series_file) if args.series_file else euler_formal_coeffs(args.terms)


def cmd_borel_sum(args) -> str:
    s = _series(args)
    x = complex(args.x, args.x_im)
    res = borel_engine.borel_sum(s, x, args.theta, args.order, args.tol, continuation=args.continuation)
    if args.format == "csv":
        return _csv(("value_re", "value_im", "theta", "err", "pade_L", "pade_M"),
                    [[repr(res.value.real), repr(res.value.imag), repr(res.direction.theta),
                      repr(res.err_estimate), *res.pade_order]])
    return json.dumps({"x": _c(x), **res.to_dict()})


def cmd_stokes(args) -> str:
    s = _series(args)
    if s.offset != 1:
        raise UsageError("stokes needs an offset-1 series")
    rep = borel_engine.detect_stokes(borel_transform(s), min(args.order, s.order))
    jump = None
    if args.jump_x is not None:
        if len(rep.exceptional_directions) != 1:
            raise UsageError("--jump-x needs exactly one exceptional direction")
        th = rep.exceptional_directions[0].theta
        jump, err = borel_engine.stokes_jump(s, args.jump_x, th - args.half_width, th + args.half_width,
                                             args.order, args.tol, full_output=True)
    if args.format == "csv":
        return rep.to_csv()
    out = rep.to_dict()
    if jump is not None:
        out["jump"] = {"x": args.jump_x, "value": _c(jump), "err": err}
    return json.dumps(out)


def cmd_axioms(args) -> str:
    rep = axioms.run_axiom_suite(
        {"order": args.order, "tol": args.tol, "seed": args.seed, "n_random": args.n_random}
    )
    if args.format == "json":
        return rep.to_json()
    if args.format == "table":
        return rep.table() + "\n"
    return _csv(
        ("property", "name", "instances", "max_deviation", "tolerance", "pass"),
        [[r.property_id, r.name, len(r.instances), repr(r.max_deviation), repr(r.tolerance), r.passed]
         for r in rep.records],
    )


def cmd_unfold(args) -> str:
    cfg = unfolding.UnfoldingConfig(args.eps, _g_for(args, args.eps), args.N, args.clearance)
    rep = unfolding.connection_coefficient(cfg, args.radius, side=args.side, tol=args.tol)
    if args.format == "csv":
        row = {"eps": args.eps, "C2": rep.C2, "abs_C2": abs(rep.C2), "fit_residual": rep.fit_residual,
               "nearest_resonance": unfolding.nearest_resonance(args.eps)}
        return unfolding.sweep_to_csv([row])
    return rep.to_json()


def cmd_sweep(args) -> str:
    if args.g_file:
        g = _g_for(args, None)
    else:
        parse_polynomial(args.g, 1.0)  # validate before the sweep starts
        g = lambda e: parse_polynomial(args.g, e)  # noqa: E731
    rows = unfolding.unfolding_sweep(g, args.eps, args.rule, N=args.N, tol=args.tol)
    for r in rows:
        if r["error"]:
            print(f"resum sweep: eps={r['eps']!r}: {r['error']}", file=sys.stderr)
    if args.format == "json":
        return unfolding.sweep_to_json(rows)
    return unfolding.sweep_to_csv(rows)


# ---- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resum", description="Resummation of divergent series: "
                                "optimal truncation, Borel-Laplace sums, Stokes directions, unfolding.")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, help_, fmt=("csv", "json"), default="csv"):
        sp = sub.add_parser(name, help=help_, description=help_, formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--format", choices=fmt, default=default)
        sp.add_argument("--out", default="-", help="output path; '-' writes to stdout (default)")
        sp.add_argument("--tol", type=_positive("--tol"), default=1e-10)
        return sp

    sp = add("euler-table", "Exact solution of x^2 y' + y = x, f(x) = int_0^inf e^(-z/x)/(1+z) dz, "
             "by two quadratures, with the optimal truncation of sum (-1)^n n! x^(n+1).")
    sp.add_argument("--x-min", type=_positive("--x-min"), default=0.02)
    sp.add_argument("--x-max", type=_positive("--x-max"), default=0.2)
    sp.add_argument("--n", type=int, default=10)
    sp.set_defaults(func=cmd_euler_table)

    sp = add("truncate", "Partial sums f_k of sum (-1)^n n! x^(n+1), the formal solution of x^2 y' + y = x; the bound |f - f_k| <= k! x^(k+1) "
             "and the remainder integral (-1)^k int_0^inf z^k e^(-z/x)/(1+z) dz.")
    sp.add_argument("--x", type=_positive("--x"), required=True)
    sp.add_argument("--k-max", type=int, default=20)
    sp.set_defaults(func=cmd_truncate)

    series_help = "JSON series {offset, re, im, label}; default is the formal solution of x^2 y' + y = x"
    sp = add("borel-sum", "Borel-Laplace sum int_d B(z) e^(-z/x) dz of a formal series along the ray "
             "at angle theta; by default the series solving x^2 y' + y = x.", default="json")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--x-im", type=float, default=0.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--order", type=int, default=24)
    sp.add_argument("--terms", type=int, default=40, help="coefficients of the default series")
    sp.add_argument("--series-file", help=series_help)
    sp.add_argument("--continuation", choices=("auto", "pade", "taylor"), default="auto")
    sp.set_defaults(func=cmd_borel_sum)

    sp = add("stokes", "Singularities of the Borel transform sum a_n z^n / n! and the exceptional "
             "directions; for x^2 y' + y = x the pole 1/(1+z) at z = -1 gives theta = pi.")
    sp.add_argument("--order", type=int, default=20)
    sp.add_argument("--terms", type=int, default=40)
    sp.add_argument("--series-file", help=series_help)
    sp.add_argument("--jump-x", type=float, help="also report S_+(x) - S_-(x) across the direction")
    sp.add_argument("--half-width", type=_positive("--half-width"), default=0.5)
    sp.set_defaults(func=cmd_stokes)

    sp = add("axioms", "Check consistency, linearity, absolute summability, Cauchy products, tail "
             "shift and termwise differentiation of the Borel sum of sum a_n.",
             fmt=("table", "csv", "json"), default="table")
    sp.add_argument("--order", type=int, default=24)
    sp.add_argument("--seed", type=int, default=axioms.DEFAULT_SEED)
    sp.add_argument("--n-random", type=int, default=2)
    sp.set_defaults(func=cmd_axioms)

    g_help = "g(x) as a sum of monomials c*x^n (decimal or rational c; the atom eps is allowed)"
    sp = add("unfold", "Connection coefficient C2 of (x^2 - eps) y' + y = g(x): continuation of the "
             "solution bounded at +sqrt(eps) to -sqrt(eps), where it equals h2 + C2 ((x+s)/(x-s))^(1/(2s)).",
             default="json")
    sp.add_argument("--eps", type=_positive("--eps"), required=True)
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--g", help=g_help)
    grp.add_argument("--g-file", help="JSON series for g")
    sp.add_argument("--N", type=int, default=60)
    sp.add_argument("--radius", type=_positive("--radius"), help="approach radius (default sqrt(eps))")
    sp.add_argument("--clearance", type=_positive("--clearance"), help="path clearance (default 0.1 sqrt(eps))")
    sp.add_argument("--side", choices=("below", "above"), default="below")
    sp.set_defaults(func=cmd_unfold)

    sp = add("sweep", "Table of C2(eps) for (x^2 - eps) y' + y = g(x) over several eps.")
    sp.add_argument("--eps", type=_float_list, required=True, help="comma-separated eps values")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--g", help=g_help)
    grp.add_argument("--g-file", help="JSON series for g")
    sp.add_argument("--N", type=int, default=60)
    sp.add_argument("--rule", default="sqrt(eps)", help="approach radius: 'c*sqrt(eps)' or a number")
    sp.set_defaults(func=cmd_sweep)
    return p


def _validate(args) -> None:
    tol = args.tol
    if not 1e-14 <= tol <= 1e-3:
        raise UsageError("--tol must lie in [1e-14, 1e-3]")
    order = getattr(args, "order", None)
    if order is not None and not 2 <= order <= 160:
        raise UsageError("--order must lie in [2, 160]")
    terms = getattr(args, "terms", None)
    if terms is not None and not 2 <= terms <= 170:
        raise UsageError("--terms must lie in [2, 170]")
    if args.command == "truncate":
        if not 0 <= args.k_max <= 170:
            raise UsageError("--k-max must lie in [0, 170]")
        if args.x > 0.5:
            raise UsageError("--x must be <= 0.5")
    if args.command in ("unfold", "sweep") and args.N < 2:
        raise UsageError("--N must be >= 2")
    if args.command == "axioms" and args.n_random < 0:
        raise UsageError("--n-random must be >= 0")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        text = args.func(args)
    except (UsageError, PreconditionError) as exc:
        print(f"resum {args.command}: invalid argument: {exc}", file=sys.stderr)
        return 2
    except ResumError as exc:
        print(f"resum {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
