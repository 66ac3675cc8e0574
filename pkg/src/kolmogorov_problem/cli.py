"""Command-line front end.

Every run prints exactly one JSON envelope ``{command, inputs, result,
diagnostics}`` on stdout, except when CSV output is selected for a successful
run (``eval`` defaults to CSV). Exit codes: 0 success, 2 infeasible instance
(``check``/``solve``), 1 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import euler, ppoly, psi, solver
from .errors import KolmogorovError

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(x):
    """JSON/CSV friendly number: Python ints stay ints, floats keep shortest repr."""
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return x


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _positive(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {s!r}")
    return v


def _finite(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {s!r}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated finite numbers, got {s!r}")
    return vals


def _int_list(s: str) -> list[int]:
    try:
        vals = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_format(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON envelope output")
    g.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV output")


def _add_instance(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=int, required=True, help="highest derivative order (r >= 4)")
    p.add_argument("--k2", type=int, required=True, help="middle order, 0 < k2 < r - 2")
    p.add_argument("--m0", type=_positive, required=True, help="target ||x||")
    p.add_argument("--mk2", type=_positive, required=True, help="target ||x^(k2)||")
    p.add_argument("--mrm2", type=_positive, required=True, help="target ||x^(r-2)||")
    p.add_argument("--mr", type=_positive, required=True, help="target ||x^(r)||")
    _add_format(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kolmogorov-problem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="decide feasibility of (M0, Mk2, Mrm2, Mr)")
    _add_instance(p)

    p = sub.add_parser("solve", help="solve for the comparison function and extremal function")
    _add_instance(p)
    p.add_argument("--emit-extremal", metavar="PATH", help="write the extremal function as ppoly JSON")

    p = sub.add_parser("eval", help="sample a ppoly JSON file (or its derivative)")
    p.add_argument("--input", metavar="PATH", required=True)
    p.add_argument("--from", dest="t_from", type=_finite, default=0.0)
    p.add_argument("--to", dest="t_to", type=_finite, default=None, help="default: one period")
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--derivative", type=int, default=0)
    _add_format(p)

    p = sub.add_parser("norms", help="table of N_s(a) = ||psi_s(a; .)||")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--a-grid", type=_float_list, required=True, help='e.g. "0,0.5,1"')
    p.add_argument("--s-list", type=_int_list, default=None, help="orders s, default 1..r")
    _add_format(p)

    p = sub.add_parser("favard", help="Favard constants K_0..K_max")
    p.add_argument("--max-r", type=int, required=True)
    _add_format(p)
    return parser


def _instance(args) -> solver.ProblemInstance:
    return solver.ProblemInstance(args.r, args.k2, args.m0, args.mk2, args.mrm2, args.mr)


def _instance_inputs(args) -> dict:
    return {"r": args.r, "k2": args.k2, "m0": args.m0, "mk2": args.mk2, "mrm2": args.mrm2, "mr": args.mr}


def _condition_diagnostics(report: solver.FeasibilityReport) -> list[str]:
    diags = []
    if not report.condition_a.holds:
        diags.append(f"condition a) violated: Mrm2 exceeds bound by {_fmt(-report.condition_a.margin)}")
    if not report.condition_b.holds:
        diags.append(f"condition b) violated: M0 below psi_cap by {_fmt(-report.condition_b.margin)}")
    if report.condition_b.diagnostic_only:
        diags.append("condition b) evaluated at a = 0 because condition a) fails")
    return diags


def _report_rows(report: solver.FeasibilityReport) -> list[list]:
    rows = [["feasible", report.feasible]]
    for name, cond in (("condition_a", report.condition_a), ("condition_b", report.condition_b)):
        for key, val in cond.to_dict().items():
            rows.append([f"{name}.{key}", val])
    return rows


def cmd_check(args):
    report = solver.decide(_instance(args))
    result = report.to_dict()
    code = EXIT_OK if report.feasible else EXIT_INFEASIBLE
    return result, _condition_diagnostics(report), code, [["key", "value"]] + _report_rows(report)


def cmd_solve(args):
    report = solver.decide(_instance(args))
    result = report.to_dict()
    diags = _condition_diagnostics(report)
    rows = [["key", "value"]] + _report_rows(report)
    if not report.feasible:
        return result, diags, EXIT_INFEASIBLE, rows
    n0, nk, nrm2, nr = solver.extremal_norms(report)
    result["measured_norms"] = {"M0": n0, "Mk2": nk, "Mrm2": nrm2, "Mr": nr}
    if report.params.a == 0.0:
        diags.append("plateau length a = 0: comparison function is a scaled Euler spline")
    for key, val in report.params.to_dict().items():
        rows.append([f"params.{key}", val])
    rows.append(["psi_cap", report.psi_cap])
    for key, val in result["measured_norms"].items():
        rows.append([f"measured_norms.{key}", val])
    if args.emit_extremal:
        with open(args.emit_extremal, "w", encoding="utf-8") as fh:
            fh.write(ppoly.to_json(report.extremal))
            fh.write("\n")
        result["extremal_path"] = args.emit_extremal
    return result, diags, EXIT_OK, rows


def cmd_eval(args):
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    if args.derivative < 0:
        raise UsageError("--derivative must be >= 0")
    try:
        with open(args.input, encoding="utf-8") as fh:
            p = ppoly.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}")
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid ppoly JSON in {args.input}: {exc}")
    if args.derivative > p.smoothness + 1:
        raise UsageError(
            f"derivative {args.derivative} is not a function: input is only C^{p.smoothness}"
        )
    for _ in range(args.derivative):
        p = ppoly.derivative(p)
    t_to = p.period if args.t_to is None else args.t_to
    t = np.array([args.t_from]) if args.points == 1 else np.linspace(args.t_from, t_to, args.points)
    v = np.atleast_1d(ppoly.evaluate(p, t))
    rows = [["t", "value"]] + [[float(a), float(b)] for a, b in zip(t, v)]
    result = {"columns": ["t", "value"], "rows": rows[1:]}
    diags = []
    if p.ae_derivative:
        diags.append("values at breakpoints follow the right-continuous convention")
    return result, diags, EXIT_OK, rows


def cmd_norms(args):
    if not 1 <= args.r <= psi.R_MAX:
        raise UsageError(f"--r must be in [1, {psi.R_MAX}]")
    if any(a < 0 for a in args.a_grid):
        raise UsageError("--a-grid entries must be >= 0")
    s_list = args.s_list or list(range(1, args.r + 1))
    if any(not 1 <= s <= args.r for s in s_list):
        raise UsageError(f"--s-list entries must be in [1, {args.r}]")
    splines = [psi.build_psi(a, args.r) for a in args.a_grid]
    # N_s(a) = ||psi_s(a)|| = ||psi_r(a)^(r-s)||
    table = [[sp.norm(args.r - s) for sp in splines] for s in s_list]
    result = {
        "a_grid": list(args.a_grid),
        "rows": [{"s": s, "values": vals} for s, vals in zip(s_list, table)],
    }
    rows = [["s"] + [f"a={_fmt(a)}" for a in args.a_grid]]
    rows += [[s] + vals for s, vals in zip(s_list, table)]
    return result, [], EXIT_OK, rows


def cmd_favard(args):
    if not 0 <= args.max_r <= euler.R_MAX:
        raise UsageError(f"--max-r must be in [0, {euler.R_MAX}]")
    entries = []
    for r in range(args.max_r + 1):
        value, remainder = euler.favard_series(r)
        entries.append({"r": r, "K": value, "remainder_bound": remainder})
    rows = [["r", "K", "remainder_bound"]] + [[e["r"], e["K"], e["remainder_bound"]] for e in entries]
    return {"constants": entries}, [], EXIT_OK, rows


_COMMANDS = {"check": cmd_check, "solve": cmd_solve, "eval": cmd_eval, "norms": cmd_norms, "favard": cmd_favard}
_DEFAULT_FORMAT = {"eval": "csv"}


def _inputs(args) -> dict:
    if args.command in ("check", "solve"):
        d = _instance_inputs(args)
        if args.command == "solve":
            d["emit_extremal"] = args.emit_extremal
        return d
    if args.command == "eval":
        return {
            "input": args.input,
            "from": args.t_from,
            "to": args.t_to,
            "points": args.points,
            "derivative": args.derivative,
        }
    if args.command == "norms":
        return {"r": args.r, "a_grid": list(args.a_grid), "s_list": args.s_list}
    return {"max_r": args.max_r}


def _envelope(command: str, inputs: dict, result, diagnostics: list[str]) -> str:
    env = {"command": command, "inputs": inputs, "result": result, "diagnostics": diagnostics}
    return json.dumps(env, indent=2, allow_nan=False, default=_num)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _guess_command(argv: list[str]) -> str:
    for tok in argv:
        if tok in _COMMANDS:
            return tok
    return ""


def run(argv: list[str] | None = None, out=None) -> int:
    """Run the CLI on ``argv`` writing to ``out`` (default stdout); return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        out.write(_envelope(_guess_command(argv), {"argv": argv}, None, [f"usage error: {exc}"]) + "\n")
        return EXIT_ERROR
    inputs = _inputs(args)
    try:
        result, diags, code, rows = _COMMANDS[args.command](args)
    except UsageError as exc:
        out.write(_envelope(args.command, inputs, None, [f"usage error: {exc}"]) + "\n")
        return EXIT_ERROR
    except (KolmogorovError, ValueError, OSError) as exc:
        out.write(_envelope(args.command, inputs, None, [f"{type(exc).__name__}: {exc}"]) + "\n")
        return EXIT_ERROR
    fmt = args.fmt or _DEFAULT_FORMAT.get(args.command, "json")
    if fmt == "csv":
        out.write(_csv(rows))
    else:
        out.write(_envelope(args.command, inputs, result, diags) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
