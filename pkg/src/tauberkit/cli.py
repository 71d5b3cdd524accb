"""Command-line front end: ``tauberkit {predict,eval,transform,verify,report}``.

Tables go to stdout (or ``--out``) as CSV with 17 significant digits, or as
JSON.  Exit codes: 0 success, 1 verification failure, 2 usage/config/DSL
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import construction as con
from .errors import (
    DegenerateRateError,
    ParameterError,
    RateSemanticError,
    RateSyntaxError,
    TauberkitError,
    UnboundedSearchError,
)
from .quadrature import MIN_TOL, f_deriv_eval_many, f_eval_many
from .ratefun import compose_mk, parse_rate, right_inverse
from .report import VerificationReport
from .verify import VerifyConfig, bundle_json, bundle_passed, verify_all

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_table(columns: Sequence[str], rows: Sequence[Sequence[Any]], fmt_name: str, out) -> None:
    if fmt_name == "json":
        def clean(v):
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
            return v.item() if isinstance(v, np.generic) else v

        json.dump([{c: clean(v) for c, v in zip(columns, row)} for row in rows], out, indent=2)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


# --------------------------------------------------------------------------
# argument helpers


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text}")
    return v


def _even_m(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"m must be an integer, got {text}") from None
    if m < 2 or m % 2:
        raise argparse.ArgumentTypeError(f"m must be an even integer >= 2, got {m}")
    return m


def _m_list(text: str) -> list[int]:
    return [_even_m(p) for p in text.split(",") if p.strip()]


def _tol(text: str) -> float:
    v = float(text)
    if not v >= MIN_TOL:
        raise argparse.ArgumentTypeError(f"tol must be >= {MIN_TOL:g}")
    return v


def _grid(values, lo, hi, count, log: bool) -> np.ndarray:
    if values:
        return np.asarray(values, dtype=float)
    if lo is None or hi is None:
        raise UsageError("give explicit values or both range ends")
    if count < 1:
        raise UsageError("count must be >= 1")
    if log:
        if lo <= 0 or hi <= 0:
            raise UsageError("log-spaced range needs positive ends")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="output")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--threads", type=int, help="worker threads (overrides TAUBERKIT_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tauberkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("predict", help="predicted decay rate 1/M_K^{-1}(ct)")
    p.add_argument("--M", required=True, help="rate DSL for M")
    p.add_argument("--K", required=True, help="rate DSL for K")
    p.add_argument("--c", type=float, default=1.0, help="constant in (0, 1] (default 1)")
    p.add_argument("--t", type=_positive, nargs="+", help="explicit times")
    p.add_argument("--t-min", type=_positive)
    p.add_argument("--t-max", type=_positive)
    p.add_argument("--t-count", type=int, default=20)
    _common(p)

    p = sub.add_parser("eval", help="f_m(t) (or f_m'(t)) by adaptive quadrature")
    p.add_argument("--m", type=_even_m, required=True)
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-count", type=int, default=11)
    p.add_argument("--tol", type=_tol, default=1e-8)
    p.add_argument("--derivative", action="store_true")
    _common(p)

    p = sub.add_parser("transform", help="analytic continuation of the transform, in log form")
    p.add_argument("--m", type=_even_m, required=True)
    p.add_argument("--lambda", dest="lam", type=complex, nargs="+", help="points such as 0.1+2j")
    p.add_argument("--re", type=float, default=0.0, help="real part for an imaginary-axis sweep")
    p.add_argument("--im-min", type=float)
    p.add_argument("--im-max", type=float)
    p.add_argument("--im-count", type=int, default=11)
    _common(p)

    p = sub.add_parser("verify", help="run the verification suite and write a JSON bundle")
    p.add_argument("--config", help="JSON file with verification settings")
    p.add_argument("--m-list", type=_m_list, help="comma-separated even m values")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    p.add_argument("--out", help="bundle path (default stdout)")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("report", help="summarise a bundle written by verify")
    p.add_argument("bundle", help="bundle JSON path")
    _common(p)
    return parser


# --------------------------------------------------------------------------
# subcommands


def cmd_predict(args, out) -> int:
    M, K = parse_rate(args.M), parse_rate(args.K)
    if not 0 < args.c <= 1:
        raise UsageError("c must lie in (0, 1]")
    ts = _grid(args.t, args.t_min, args.t_max, args.t_count, log=True)
    mk = compose_mk(M, K)
    rows = []
    for t in ts:
        try:
            inv = right_inverse(mk, args.c * t)
            if inv <= 0:
                raise DegenerateRateError("ct <= M_K(0)")
            rows.append((float(t), float(args.c * t), inv, float(mk.eval(inv)), 1.0 / inv, "ok"))
        except (DegenerateRateError, UnboundedSearchError) as exc:
            flag = "degenerate" if isinstance(exc, DegenerateRateError) else "unbounded"
            rows.append((float(t), float(args.c * t), math.nan, math.nan, math.nan, flag))
    write_table(("t", "ct", "mk_inverse", "mk_at_inverse", "rate", "status"), rows, args.output, out)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    ts = _grid(args.t, args.t_min, args.t_max, args.t_count, log=False)
    fn = f_deriv_eval_many if args.derivative else f_eval_many
    results = fn(args.m, ts, args.tol, strict=False)
    rows = [
        (float(t), r.value.real, r.value.imag, r.abs_error_estimate, r.truncation_bound, r.nodes_used,
         "ok" if r.abs_error_estimate <= args.tol else "tol-not-met")
        for t, r in zip(ts, results)
    ]
    cols = ("t", "re", "im", "error_estimate", "truncation_bound", "nodes", "status")
    write_table(cols, rows, args.output, out)
    return EXIT_OK


def cmd_transform(args, out) -> int:
    if args.lam:
        lam = np.asarray(args.lam, dtype=complex)
    else:
        ims = _grid(None, args.im_min, args.im_max, args.im_count, log=False)
        lam = args.re + 1j * ims
    rows = []
    for z in lam:
        try:
            lc = con.transform_eval(args.m, complex(z))
            status = "ok"
            lm, ph = lc.log_mag, lc.phase
        except TauberkitError as exc:
            status = type(exc).__name__
            lm = ph = math.nan
        rows.append((z.real, z.imag, lm, ph, status))
    write_table(("re", "im", "log_mag", "phase", "status"), rows, args.output, out)
    return EXIT_OK


def load_config(path: str | None, m_list: list[int] | None) -> VerifyConfig:
    data: dict[str, Any] = {}
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        if not data:
            raise UsageError("config is empty")
    if m_list is not None:
        if not m_list:
            raise UsageError("--m-list is empty")
        data["m_list"] = m_list
    if not data:
        return VerifyConfig()
    return VerifyConfig.from_mapping(data)


def cmd_verify(args, out) -> int:
    cfg = load_config(args.config, args.m_list)
    reports = verify_all(cfg)
    out.write(bundle_json(reports, cfg, timestamp=not args.no_timestamp))
    out.write("\n")
    for r in reports:
        print(r.summary_line(), file=sys.stderr)
    return EXIT_OK if bundle_passed(reports) else EXIT_FAIL


def cmd_report(args, out) -> int:
    try:
        with open(args.bundle) as fh:
            data = json.load(fh)
        reports = [VerificationReport.from_dict(d) for d in data["reports"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read bundle {args.bundle}: {exc}") from None
    rows = [
        (r.property_id, "PASS" if r.passed else ("XFAIL" if r.expected_failure else "FAIL"),
         r.extremum, r.threshold)
        for r in reports
    ]
    write_table(("property_id", "verdict", "extremum", "threshold"), rows, args.output, out)
    return EXIT_OK


COMMANDS = {
    "predict": cmd_predict,
    "eval": cmd_eval,
    "transform": cmd_transform,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["TAUBERKIT_THREADS"] = str(args.threads)
    buf = io.StringIO()
    try:
        code = COMMANDS[args.subcommand](args, buf)
    except (UsageError, RateSyntaxError, RateSemanticError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TauberkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
