"""Command-line front end.

Exit codes: 0 success / confirmed, 1 negative verdict, 2 input error,
3 inconclusive.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys

import numpy as np

from . import holder, isoperimetric, problemfile
from .errors import ParameterError, ScaleCalcError
from .expr import parse
from .scale_ops import Curve, max_leibniz_defect, scale_derivative_field
from .variational import bracket_samples, functional_value, is_extremal, residual_samples

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3
LEIBNIZ_THRESHOLD = 1e-10

SWEEP_HEADER = [
    "eps", "x", "residual_re", "residual_im",
    "bracket_value_re", "bracket_value_im", "sup_abs_residual", "flags",
]

VERDICT_EXIT = {
    isoperimetric.EXTREMAL_CONFIRMED: EXIT_OK,
    isoperimetric.STATIONARITY_VIOLATED: EXIT_NEGATIVE,
    isoperimetric.HYPOTHESES_FAILED: EXIT_NEGATIVE,
    isoperimetric.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def fmt(value) -> str:
    if value is None or value == "":
        return ""
    return f"{float(value):.17g}"


def _csv_writer(out):
    return csv.writer(out, lineterminator="\n")


def parse_grid(text: str) -> np.ndarray:
    """``"x0,x1,..."`` or ``"lo:hi:n"`` (n evenly spaced points, endpoints included)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"grid range must be lo:hi:n, got {text!r}")
        lo, hi = problemfile.constant(parts[0]), problemfile.constant(parts[1])
        n = int(parts[2])
        if n < 1:
            raise ParameterError("grid needs at least one point")
        return np.linspace(lo, hi, n)
    values = [problemfile.constant(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ParameterError("empty grid")
    return np.array(values)


def _flags(est):
    flags = []
    if est.is_zero:
        flags.append("zero")
    if not est.converged:
        flags.append("unconverged")
    if est.diverging:
        flags.append("diverging")
    return ";".join(flags)


def _complex_text(z) -> str:
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}i"


# ---------------------------------------------------------------------------
# commands


def cmd_scale_deriv(args, out):
    prob = problemfile.load(args.file, args.numerics) if args.file else None
    if args.curve is not None:
        curve = Curve.closed_form(parse(args.curve))
    elif prob is not None:
        prob.require("curve")
        curve = prob.curve
    else:
        raise ParameterError("give a problem file or --curve")
    if args.grid is not None:
        grid = parse_grid(args.grid)
    elif prob is not None:
        grid = prob.grid
    else:
        raise ParameterError("give a problem file with [interval] or --grid")
    eps = args.eps if args.eps is not None else (prob.numerics.eps0 if prob else problemfile.Numerics().eps0)
    values = scale_derivative_field(curve, grid, eps)
    w = _csv_writer(out)
    w.writerow(["x", "re", "im"])
    for x, z in zip(grid, values):
        w.writerow([fmt(x), fmt(z.real), fmt(z.imag)])
    return EXIT_OK


def _residual_sweep_rows(prob, lagrangian):
    schedule = prob.numerics.schedule
    grid = prob.grid
    samples = residual_samples(lagrangian, prob.curve, grid, schedule)
    brackets = bracket_samples(samples, schedule, prob.numerics.zero_tol, prob.numerics.conv_tol)
    rows = []
    for eps, row in zip(schedule.values, samples):
        sup = np.max(np.abs(row))
        for x, r, est in zip(grid, row, brackets):
            rows.append([fmt(eps), fmt(x), fmt(r.real), fmt(r.imag),
                         fmt(est.value.real), fmt(est.value.imag), fmt(sup), _flags(est)])
    return rows


def cmd_el_check(args, out):
    prob = problemfile.load(args.file, args.numerics)
    prob.require("interval", "curve")
    lagrangian = prob.lagrangian(args.lagrangian)
    n = prob.numerics
    check = is_extremal(lagrangian, prob.curve, prob.grid, n.schedule, n.zero_tol, n.conv_tol)
    print(f"lagrangian: {args.lagrangian} = {lagrangian}", file=out)
    print(f"schedule: eps0={fmt(n.eps0)} ratio={fmt(n.ratio)} count={n.count}", file=out)
    for x, est in zip(prob.grid, check.brackets):
        flags = _flags(est) or "-"
        print(f"x={fmt(x)} bracket={_complex_text(est.value)} tail={fmt(est.tail_residual)} flags={flags}", file=out)
    print(f"verdict: {check.status}", file=out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = _csv_writer(fh)
            w.writerow(SWEEP_HEADER)
            w.writerows(_residual_sweep_rows(prob, lagrangian))
    return {"extremal": EXIT_OK, "not_extremal": EXIT_NEGATIVE}.get(check.status, EXIT_INCONCLUSIVE)


def _bool_text(value):
    return "true" if value else "false"


def cmd_iso_check(args, out):
    prob = problemfile.load(args.file, args.numerics)
    prob.require("interval", "boundary", "objective", "constraint", "curve")
    report = isoperimetric.verify_iso_extremal(prob.iso_problem(), prob.curve, prob.numerics.iso_tol)
    lam = "n/a" if report.lam is None else fmt(report.lam)
    sup = "n/a" if report.residual_sup_norm_L is None else fmt(report.residual_sup_norm_L)
    d = report.diagnostics
    print(f"lambda: {lam}", file=out)
    print(f"hypothesis 1 (y is not an extremal of G): {'ok' if report.hypothesis1_ok else 'FAILED'}", file=out)
    print(f"hypothesis 2 (finite residual sup-norm limits): {'ok' if report.hypothesis2_ok else 'FAILED'}", file=out)
    print(f"  sup-norm limit for f: {_complex_text(d['sup_f'].value)} ({_flags(d['sup_f']) or 'converged'})", file=out)
    print(f"  sup-norm limit for g: {_complex_text(d['sup_g'].value)} ({_flags(d['sup_g']) or 'converged'})", file=out)
    print(f"constraint value G(y): {_complex_text(d['constraint_value'])}", file=out)
    print(f"constraint gap |G(y) - K|: {fmt(report.constraint_gap)}", file=out)
    print(f"residual sup-norm of L = f - lambda g: {sup}", file=out)
    print(f"verdict: {report.verdict}", file=out)
    if args.kv:
        print("", file=out)
        pairs = [
            ("lambda", "" if report.lam is None else fmt(report.lam)),
            ("hypothesis1_ok", _bool_text(report.hypothesis1_ok)),
            ("hypothesis2_ok", _bool_text(report.hypothesis2_ok)),
            ("constraint_gap", fmt(report.constraint_gap)),
            ("residual_sup_norm_L", fmt(report.residual_sup_norm_L)),
            ("verdict", report.verdict),
        ]
        for key, value in pairs:
            print(f"{key}={value}", file=out)
    return VERDICT_EXIT[report.verdict]


def cmd_leibniz_test(args, out):
    if args.trials < 0:
        raise ParameterError("trials must be non-negative")
    if args.trials == 0:
        print("warning: trials=0, nothing tested", file=sys.stderr)
    worst = max_leibniz_defect(args.seed, args.trials)
    passed = worst <= LEIBNIZ_THRESHOLD
    print(f"trials={args.trials} seed={args.seed} max_defect={fmt(worst)} "
          f"threshold={fmt(LEIBNIZ_THRESHOLD)} {'PASS' if passed else 'FAIL'}", file=out)
    return EXIT_OK if passed else EXIT_NEGATIVE


def cmd_sweep(args, out):
    prob = problemfile.load(args.file, args.numerics)
    prob.require("interval", "curve")
    n = prob.numerics
    schedule = n.schedule
    w = _csv_writer(out)
    w.writerow(SWEEP_HEADER)
    if args.what == "residual":
        w.writerows(_residual_sweep_rows(prob, prob.lagrangian(args.lagrangian)))
    elif args.what == "functional":
        lagrangian = prob.lagrangian(args.lagrangian)
        values = [functional_value(lagrangian, prob.curve, prob.a, prob.b, e, n.quad) for e in schedule.values]
        (est,) = bracket_samples(values, schedule, n.zero_tol, n.conv_tol)
        for eps, z in zip(schedule.values, values):
            w.writerow([fmt(eps), "", fmt(z.real), fmt(z.imag),
                        fmt(est.value.real), fmt(est.value.imag), "", _flags(est)])
    else:
        est = holder.estimate_exponent(prob.curve, schedule.values, n.probe_count, n.seed, (prob.a, prob.b))
        for k, eps in enumerate(schedule.values):
            omega = holder.modulus_of_continuity(prob.curve, eps, n.probe_count, n.seed + k, (prob.a, prob.b))
            w.writerow([fmt(eps), "", fmt(omega), fmt(0.0), fmt(est.alpha_hat), fmt(est.c_hat), "",
                        "degenerate" if est.degenerate else ""])
    return EXIT_OK


def cmd_defaults(args, out):
    for key, value in problemfile.Numerics().items():
        print(f"{key}={value}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scalecalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    numerics = argparse.ArgumentParser(add_help=False)
    numerics.add_argument("--numerics", action="append", default=[], metavar="KEY=VALUE",
                          help="override a [numerics] entry (repeatable)")

    p = sub.add_parser("scale-deriv", parents=[numerics], help="scale derivative of a curve on a grid (CSV)")
    p.add_argument("file", nargs="?")
    p.add_argument("--curve", help="closed-form curve in x; overrides the file's [curve]")
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", help="x0,x1,... or lo:hi:n (use --grid=-1,0,1 for negative values)")
    p.set_defaults(func=cmd_scale_deriv)

    p = sub.add_parser("el-check", parents=[numerics], help="Euler-Lagrange extremality check")
    p.add_argument("file")
    p.add_argument("--lagrangian", choices=("objective", "constraint"), default="objective")
    p.add_argument("--csv", metavar="PATH", help="also write the residual sweep to PATH")
    p.set_defaults(func=cmd_el_check)

    p = sub.add_parser("iso-check", parents=[numerics], help="isoperimetric stationarity check")
    p.add_argument("file")
    p.add_argument("--kv", action="store_true", help="append a key=value block")
    p.set_defaults(func=cmd_iso_check)

    p = sub.add_parser("leibniz-test", help="randomized check of the quantum Leibniz rule")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500)
    p.set_defaults(func=cmd_leibniz_test)

    p = sub.add_parser("sweep", parents=[numerics], help="CSV table across the eps schedule")
    p.add_argument("file")
    p.add_argument("--what", choices=("residual", "functional", "holder"), default="residual")
    p.add_argument("--lagrangian", choices=("objective", "constraint"), default="objective")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("defaults", help="print the default numerics")
    p.set_defaults(func=cmd_defaults)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    buffer = io.StringIO()
    try:
        code = args.func(args, buffer)
    except (ScaleCalcError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(buffer.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
