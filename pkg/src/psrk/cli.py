"""``rk`` command-line entry point."""
from __future__ import annotations

import argparse
import csv
import io
import sys

from . import analysis, harness
from .integrate import DEFAULT_TOL
from .tableau import family_tableau, format_tableau, resolve_method, zeta

EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("step sizes must be positive")
    return vals


def _csv_line(values) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow(values)
    return buf.getvalue()


def _fmt_leading(row: dict) -> str:
    if not row["rr_power"]:
        return "0"
    return f"{row['rr_coeff']:+.8g} z^{row['rr_power']}"


def cmd_analyze(args) -> int:
    tab = resolve_method(args.method)
    a = analysis.analyze(tab, args.qmax)
    row = harness.analysis_row(a, args.method)
    fields = [
        ("method", args.method),
        ("stages s", row["s"]),
        ("order p", row["p"]),
        ("pseudo-symplectic q", row["q"]),
        ("T4", f"{a.T[4]:.6g}"),
        ("T5", f"{a.T[5]:.6g}"),
        ("T6", f"{a.T[6]:.6g}"),
        ("R(z)R(-z)-1", _fmt_leading(row)),
        ("r_0..r_8", " ".join(f"{r:.6g}" for r in a.r_coeffs)),
        ("flags", " ".join(f"{k}={'y' if v else 'n'}" for k, v in a.flags.items())),
        ("max|a_ij|", f"{a.max_abs_a:.6g}"),
        ("min nonzero b_j", f"{a.min_nonzero_b:.6g}"),
    ]
    width = max(len(k) for k, _ in fields)
    for k, v in fields:
        print(f"{k:<{width}}  {v}")
    print()
    print(_csv_line(harness.TABLE1_COLUMNS))
    print(_csv_line(harness._cell(row[k]) for k in harness.TABLE1_COLUMNS))
    return EXIT_OK


def cmd_table1(args) -> int:
    rows = harness.table1_report(methods_dir=args.methods_dir)
    head = f"{'method':<8} {'s':>2} {'p':>2} {'q':>3} {'T4*1e4':>9} {'T5*1e3':>9} {'T6*1e3':>9}  {'R(z)R(-z)-1':<20} " \
           f"{'C2 D1 Dc Dc2 DAc':<17} {'max|a|':>8} {'min b':>8}"
    print(head)
    for r in rows:
        if not r["available"]:
            print(f"{r['method']:<8} (tableau not available)")
            continue
        flags = "  ".join("y" if r[k] else "n" for k in ("C2", "D1", "Dc", "Dc2", "DAc"))
        print(f"{r['method']:<8} {r['s']:>2} {r['p']:>2} {r['q']:>3} {r['T4_x1e4']:>9.5f} {r['T5_x1e3']:>9.5f} "
              f"{r['T6_x1e3']:>9.5f}  {_fmt_leading(r):<20} {flags:<17} {r['max_abs_a']:>8.4f} {r['min_nonzero_b']:>8.4f}")
    if args.out:
        harness.emit_csv(rows, args.out)
    return EXIT_OK


def cmd_drift(args) -> int:
    tab = resolve_method(args.method)
    series = harness.drift_experiment(args.problem, tab, args.h1, args.t_end, args.sample_dt,
                                      tol=args.tol, compensated=args.compensated)
    harness.emit_csv(series, args.out)
    for label in series.labels:
        dev = series.deviations(label)
        print(f"{label}: final deviation {dev[-1]:.6e}, max |deviation| {abs(dev).max():.6e}")
    print(f"{len(series.samples)} samples written to {args.out}")
    return EXIT_OK


def cmd_slope(args) -> int:
    tab = resolve_method(args.method)
    fit = harness.drift_speed_slope(args.problem, tab, args.h1, args.t_end, args.window)
    harness.emit_csv(fit, args.out)
    for h, v, f in zip(fit.h, fit.speeds, fit.floor):
        print(f"h = {h:<12.6g} speed = {v:+.6e}{'  (round-off floor)' if f else ''}")
    if fit.is_floor:
        print("slope: floor (every point is round-off dominated)")
    else:
        lo, hi = fit.window
        print(f"slope: {fit.slope:.4f} over h in [{lo:.6g}, {hi:.6g}]")
    return EXIT_OK


def cmd_zeta(args) -> int:
    print(f"{zeta(args.c2, args.c3):.17g}")
    return EXIT_OK


def cmd_family(args) -> int:
    sys.stdout.write(format_tableau(family_tableau(args.psi)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rk", description="Pseudo-symplectic Runge-Kutta toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="order, pseudo-symplectic order and diagnostics of one method")
    p.add_argument("--method", required=True, help="catalog id or tableau file")
    p.add_argument("--qmax", type=int, default=analysis.DEFAULT_QMAX)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table1", help="comparison table of the reference methods")
    p.add_argument("--methods-dir", default=None, help="directory holding <id>.txt tableau files")
    p.add_argument("--out", default=None, help="optional CSV output")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("drift", help="invariant deviations along one long run")
    p.add_argument("--problem", required=True, choices=("rigid", "pendulum"))
    p.add_argument("--method", required=True)
    p.add_argument("--h1", required=True, type=_positive)
    p.add_argument("--t-end", required=True, type=_positive)
    p.add_argument("--sample-dt", required=True, type=_positive)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="implicit solver tolerance (0: iterate to round-off)")
    p.add_argument("--compensated", action="store_true", help="Kahan-compensated state updates")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("slope", help="log-log slope of drift speed against step size")
    p.add_argument("--problem", default="pendulum", choices=("rigid", "pendulum"))
    p.add_argument("--method", required=True)
    p.add_argument("--h1", required=True, type=_float_list, help="comma-separated h1 values")
    p.add_argument("--t-end", required=True, type=_positive)
    p.add_argument("--window", type=_positive, default=None, help="averaging window (default t_end/10)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("zeta", help="evaluate the zeta polynomial")
    p.add_argument("--c2", required=True, type=float)
    p.add_argument("--c3", required=True, type=float)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("family", help="print the family member for a given psi")
    p.add_argument("--psi", required=True, type=float)
    p.set_defaults(func=cmd_family)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rk: error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # runtime failures: integration, I/O
        print(f"rk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
