"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 usage, parse or validation error.
Errors are reported on stderr as a single line ``error[<reason>]: <detail>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .ageing import (
    DEFAULT_GRID_N,
    AgeingClass,
    MRLShape,
    classify_crossing,
    classify_mrl_shape,
    resolve_idmrl,
    validate_mrl,
)
from .bounds import deficiency, nbue_bounds, nwbue_bound_b, nwbue_bounds
from .checks import errata, run_checks
from .convergence import (
    Family,
    HypothesisViolation,
    doubling_index_set,
    exponential_mean_sequence,
    run_convergence,
    weibull_shape_sequence,
)
from .distributions import default_horizon, from_mrl, moment, mrl_of
from .numerics import DEFAULT_SIGN_TOL, QuadratureError
from .specfile import DistSpec, SpecError, load_spec, to_distribution

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.6f}"


def csv_float(x: float) -> str:
    return f"{x:.15g}"


@dataclass
class Report:
    """Plain-text command output; identical inputs give identical bytes."""

    command: str
    digest: Optional[str] = None
    lines: list[str] = field(default_factory=list)
    exit_code: int = EXIT_OK

    def add(self, line: str = "") -> None:
        self.lines.append(line)

    def table(self, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
        widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
        for row in (header, *rows):
            self.add("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())

    def render(self) -> str:
        head = [f"nbuekit {__version__}", f"command: {self.command}"]
        if self.digest:
            head.append(f"input-sha256: {self.digest}")
        return "\n".join(head + [""] + self.lines) + "\n"


def _header(report: Report, spec: DistSpec, d) -> None:
    report.add(f"distribution: {spec.label}")
    report.add(f"mean: {fmt(d.mean)}")


# ---------------------------------------------------------------- commands

def cmd_classify(spec: DistSpec, horizon=None, grid=DEFAULT_GRID_N, tol=DEFAULT_SIGN_TOL, command="classify") -> Report:
    d = to_distribution(spec)
    report = Report(command, spec.digest)
    _header(report, spec, d)
    verdict = classify_crossing(d, horizon, grid, tol)
    shape = classify_mrl_shape(d, verdict.horizon, grid, tol)
    report.add(f"horizon: {fmt(verdict.horizon)}")
    report.add(f"crossing pattern: {verdict.pattern}")
    tau = f" (tau0 = {fmt(shape.turning_point)})" if shape.turning_point is not None else ""
    report.add(f"mrl shape: {shape.label.value}{tau}")
    if verdict.crossings:
        report.add("crossings: " + ", ".join(fmt(x) for x in verdict.crossings))
    cp = f", x0 = {fmt(verdict.change_point)}" if verdict.change_point is not None else ""
    report.add(f"verdict: {verdict.label.value}{cp}")

    if shape.label in (MRLShape.IDMRL, MRLShape.DIMRL):
        resolved = resolve_idmrl(d, shape, verdict.horizon, grid, tol)
        same_point = (
            resolved.change_point is None and verdict.change_point is None
        ) or (
            resolved.change_point is not None and verdict.change_point is not None
            and abs(resolved.change_point - verdict.change_point) <= 1e-6
        )
        agree = resolved.label == verdict.label and same_point
        rcp = f", x* = {fmt(resolved.change_point)}" if resolved.change_point is not None else ""
        report.add(f"turning-point resolution: {resolved.label.value}{rcp} ({'agrees' if agree else 'DISAGREES'})")
        if not agree:
            report.exit_code = EXIT_CHECK
        crossing_class = {MRLShape.IDMRL: AgeingClass.NWBUE, MRLShape.DIMRL: AgeingClass.NBWUE}[shape.label]
        if verdict.label != crossing_class:
            report.add(
                f"summary: {shape.label.value} (tau0 = {fmt(shape.turning_point)}) and "
                f"{verdict.label.value} - not {crossing_class.value}"
            )
    return report


def cmd_bounds(spec: DistSpec, order: float, x0: Optional[float] = None, command="bounds") -> Report:
    d = to_distribution(spec)
    report = Report(command, spec.digest)
    _header(report, spec, d)
    report.add(f"order r: {order:g}")
    if x0 is None:
        verdict = classify_crossing(d)
        if verdict.label in (AgeingClass.NWBUE, AgeingClass.NBWUE):
            x0, source = verdict.change_point, f"{verdict.label.value} change point"
        elif verdict.label in (AgeingClass.NBUE, AgeingClass.EXPONENTIAL):
            x0, source = 0.0, f"{verdict.label.value}, so x0 = 0"
        else:
            source = f"{verdict.label.value}; NWBUE bounds not applicable"
    else:
        source = "given"
    nbue = nbue_bounds(d, order)
    report.add(f"moment mu_r: {fmt(nbue.quantity)}")
    report.add(f"x0: {fmt(x0)} ({source})")
    report.add("")
    entries = list(nbue.bounds)
    if x0 is not None:
        entries += list(nwbue_bounds(d, x0, order).bounds)
    rows = [
        (b.id.value, fmt(b.value), b.direction, fmt(b.margin), "satisfied" if b.satisfied else "violated")
        for b in entries
    ]
    report.table(("bound", "value", "dir", "margin", "status"), rows)
    if x0 is not None and float(order).is_integer() and order >= 1:
        literal = nwbue_bound_b(d.mean, x0, int(order), literal=True)
        report.add(f"note: NWBUE_B with the misprinted summand (x0/mu)^r/r! would be {fmt(literal)}")
    report.add(f"deficiency D(r): {fmt(deficiency(d, order).value)}")
    return report


def cmd_moments(spec: DistSpec, orders: Sequence[float], command="moments") -> Report:
    d = to_distribution(spec)
    report = Report(command, spec.digest)
    _header(report, spec, d)
    report.add("")
    rows = []
    for r in orders:
        df = deficiency(d, r)
        rows.append((f"{r:g}", fmt(df.moment), fmt(df.bound), fmt(df.value)))
    report.table(("r", "moment", "gamma(r+1)*mu^r", "D(r)"), rows)
    return report


def cmd_verify_mrl(spec: DistSpec, command="verify-mrl") -> Report:
    mrl = spec.mrl
    if mrl is None:
        raise UsageError(f"{spec.label} has no piecewise MRL form to verify")
    result = validate_mrl(mrl)
    report = Report(command, spec.digest)
    report.add(f"distribution: {spec.label}")
    report.add(f"segments: {len(mrl.segments)}")
    if result.valid:
        report.add("valid: yes (V1 positivity, V2 drift, V3 continuity, V4 tail)")
    else:
        report.add("valid: no")
        for v in result.violations:
            report.add(f"  {v.condition} at {v.location}: {v.detail}")
        report.exit_code = EXIT_CHECK
    return report


def cmd_invert_mrl(spec: DistSpec, out: Path, points: int = 200, command="invert-mrl") -> Report:
    mrl = spec.mrl
    if mrl is None:
        raise UsageError(f"{spec.label} has no piecewise MRL form to invert")
    if points < 2:
        raise UsageError("--points must be at least 2")
    d = to_distribution(spec) if spec.kind == "mrl_piecewise" else from_mrl(mrl)
    horizon = default_horizon(d)
    xs = np.linspace(0.0, horizon, points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("x", "mrl", "survival", "mrl_numeric"))
    for x in xs:
        writer.writerow((csv_float(x), csv_float(float(mrl(x))), csv_float(d.survival(x)), csv_float(mrl_of(d, x))))
    Path(out).write_text(buf.getvalue(), encoding="utf-8", newline="")
    report = Report(command, spec.digest)
    report.add(f"distribution: {spec.label}")
    report.add(f"mean: {fmt(d.mean)}")
    report.add(f"grid: {points} points on [0, {fmt(horizon)}]")
    report.add(f"wrote: {out}")
    return report


def converge_csv(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "mu_n", "mean_error", *[f"moment_error_r{r:g}" for r in result.orders], "cdf_sup_distance"])
    for row in result.rows:
        writer.writerow([
            row.n, csv_float(row.mu_n), csv_float(row.mean_error),
            *[csv_float(row.moment_errors[r]) for r in result.orders],
            csv_float(row.cdf_sup_distance),
        ])
    return buf.getvalue()


def cmd_converge(family: str, n_max: int, orders: Sequence[float], out: Optional[Path] = None,
                 command="converge") -> Report:
    index = doubling_index_set(n_max)
    seq = {
        Family.WEIBULL_SHAPE.value: weibull_shape_sequence,
        Family.EXPONENTIAL_MEAN.value: exponential_mean_sequence,
    }[family](index)
    result = run_convergence(seq, orders)
    report = Report(command)
    report.add(f"family: {family}")
    report.add(f"limit: mean {fmt(result.limit_mean)}, verdict {result.limit_verdict.label.value}")
    report.add("limit moments: " + ", ".join(f"r={r:g}: {fmt(v)}" for r, v in result.limit_moments.items()))
    report.add("")
    header = ("n", "mu_n", *[f"err_r{r:g}" for r in result.orders], "sup|S_n-S|")
    rows = [
        (str(row.n), fmt(row.mu_n), *[fmt(row.moment_errors[r]) for r in result.orders], fmt(row.cdf_sup_distance))
        for row in result.rows
    ]
    report.table(header, rows)
    if out is not None:
        Path(out).write_text(converge_csv(result), encoding="utf-8", newline="")
        report.add(f"wrote: {out}")
    return report


def cmd_reproduce(as_json: bool = False, command="reproduce") -> tuple[str, int]:
    results = run_checks()
    notes = errata()
    passed = all(r.passed for r in results)
    code = EXIT_OK if passed else EXIT_CHECK
    if as_json:
        doc = {
            "tool": "nbuekit",
            "version": __version__,
            "checks": [
                {"id": r.id, "name": r.name, "status": r.status, "detail": r.detail, "covers": list(r.covers)}
                for r in results
            ],
            "errata": notes,
            "passed": sum(r.passed for r in results),
            "total": len(results),
            "all_passed": passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n", code
    report = Report(command)
    for r in results:
        report.add(f"[{r.status}] {r.id:>2}  {r.name}: {r.detail}")
    report.add("")
    report.add("errata:")
    for note in notes:
        report.add(f"  - {note['item']}: {note['detail']}")
    report.add("")
    report.add(f"summary: {sum(r.passed for r in results)}/{len(results)} checks passed")
    failed = [str(r.id) for r in results if not r.passed]
    if failed:
        report.add("failed: " + ", ".join(failed))
    report.exit_code = code
    return report.render(), code


# ---------------------------------------------------------------- argument parsing

def _orders(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("orders must be positive")
    return values


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nbuekit", description="Ageing-class analysis of lifetime distributions via mean residual life.")
    p.add_argument("--version", action="version", version=f"nbuekit {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("classify", help="ageing class and change point")
    c.add_argument("spec")
    c.add_argument("--horizon", type=_positive)
    c.add_argument("--grid", type=int, default=DEFAULT_GRID_N)
    c.add_argument("--tol", type=_positive, default=DEFAULT_SIGN_TOL)

    b = sub.add_parser("bounds", help="NBUE and NWBUE moment bounds")
    b.add_argument("spec")
    b.add_argument("--order", type=_positive, required=True)
    b.add_argument("--x0", type=float)

    m = sub.add_parser("moments", help="raw moments with the NBUE reference values")
    m.add_argument("spec")
    m.add_argument("--orders", type=_orders, required=True)

    v = sub.add_parser("verify-mrl", help="check the MRL validity conditions")
    v.add_argument("spec")

    i = sub.add_parser("invert-mrl", help="tabulate the survival function implied by an MRL")
    i.add_argument("spec")
    i.add_argument("--out", required=True)
    i.add_argument("--points", type=int, default=200)

    r = sub.add_parser("reproduce", help="recompute every published example")
    r.add_argument("--json", action="store_true")

    g = sub.add_parser("converge", help="moment and law convergence along an NBUE sequence")
    g.add_argument("--family", choices=[Family.WEIBULL_SHAPE.value, Family.EXPONENTIAL_MEAN.value], required=True)
    g.add_argument("--n-max", type=int, required=True)
    g.add_argument("--orders", type=_orders, default=[1.0, 2.0])
    g.add_argument("--out")
    return p


def _fail(reason: str, message: str, code: int) -> int:
    text = " ".join(str(message).split())
    print(f"error[{reason}]: {text}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    command = shlex.join(argv)

    try:
        if args.command == "reproduce":
            text, code = cmd_reproduce(args.json, command)
            sys.stdout.write(text)
            return code
        if args.command == "converge":
            if args.n_max < 1:
                raise UsageError("--n-max must be at least 1")
            report = cmd_converge(args.family, args.n_max, args.orders, args.out, command)
        else:
            spec = load_spec(args.spec)
            if args.command == "classify":
                if args.grid < 2:
                    raise UsageError("--grid must be at least 2")
                report = cmd_classify(spec, args.horizon, args.grid, args.tol, command)
            elif args.command == "bounds":
                report = cmd_bounds(spec, args.order, args.x0, command)
            elif args.command == "moments":
                report = cmd_moments(spec, args.orders, command)
            elif args.command == "verify-mrl":
                report = cmd_verify_mrl(spec, command)
            else:
                report = cmd_invert_mrl(spec, Path(args.out), args.points, command)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except SpecError as exc:
        return _fail(exc.kind, exc, EXIT_USAGE)
    except HypothesisViolation as exc:
        return _fail("hypothesis", exc, EXIT_CHECK)
    except QuadratureError as exc:
        return _fail("numeric", exc, EXIT_CHECK)
    except OSError as exc:
        return _fail("io", exc, EXIT_USAGE)
    except ValueError as exc:
        return _fail("invalid-argument", exc, EXIT_USAGE)

    sys.stdout.write(report.render())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
