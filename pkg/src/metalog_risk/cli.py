"""Command-line interface: fit, eval, risk, and check subcommands.

Exit codes are uniform across subcommands:

    0   success
    1   malformed input (CSV, JSON, usage) or violated precondition
    2   infeasible coefficient vector where feasibility is required
    3   risk --verify found a closed-form vs quadrature gap above --tol

All output is deterministic byte-for-byte for fixed inputs and flags:
reals are printed with 17 significant digits and JSON key order is fixed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._format import dumps, format_real
from .fitting import CsvFormatError, RankDeficiencyError, fit, read_quantile_csv
from .metalog import (
    InfeasibleError,
    MetalogCoefficients,
    ProbLevel,
    is_feasible,
    quantile,
    quantile_density,
)
from .quadrature import ToleranceNotReachedError, cvar_numeric
from .risk import ALPHA_MAX, cvar, cvar6_corollary, risk_report

_EXIT_OK = 0
_EXIT_BAD_INPUT = 1
_EXIT_INFEASIBLE = 2
_EXIT_VERIFY_FAILED = 3

# Tolerance handed to the quadrature when --verify runs: an order of
# magnitude under the reporting tolerance so the oracle's own error
# cannot decide the verdict, capped into the range the quadrature can
# actually deliver in double precision.
_VERIFY_ORACLE_FACTOR = 0.1
_VERIFY_ORACLE_CAP = 1e-11
_VERIFY_ORACLE_FLOOR = 1e-13


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto the malformed-input exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="metalog-risk",
        description="Metalog distributions: fitting, evaluation, and closed-form tail risk.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser(
        "fit", help="least-squares coefficients from quantile CSV data"
    )
    p_fit.add_argument("--input", required=True,
                       help="CSV file with header p,x ('-' for stdin)")
    p_fit.add_argument("--n", required=True, type=int,
                       help="number of coefficients to fit")
    p_fit.add_argument("--strict-feasible", action="store_true",
                       help="exit 2 when the fitted vector is infeasible")
    p_fit.add_argument("--output", default="-",
                       help="output path (default stdout)")

    p_eval = sub.add_parser(
        "eval", help="evaluate quantiles and densities at given levels"
    )
    p_eval.add_argument("--coeffs", required=True,
                        help="coefficient JSON ('-' for stdin)")
    p_eval.add_argument("--alpha", action="append", type=float, default=[],
                        help="probability level (repeatable)")
    p_eval.add_argument("--grid", type=int, default=0,
                        help="evaluate on N evenly spaced interior levels instead")
    p_eval.add_argument("--dump", action="store_true",
                        help="plain 'p quantile pdf' columns instead of JSON")
    p_eval.add_argument("--output", default="-",
                        help="output path (default stdout)")

    p_risk = sub.add_parser(
        "risk", help="VaR/CVaR/mean report, optionally with partial moments"
    )
    p_risk.add_argument("--coeffs", required=True,
                        help="coefficient JSON ('-' for stdin)")
    p_risk.add_argument("--alpha", action="append", type=float, default=[],
                        help="CVaR level (repeatable, at least one)")
    p_risk.add_argument("--threshold", action="append", type=float, default=[],
                        help="partial-moment threshold (repeatable)")
    p_risk.add_argument("--verify", action="store_true",
                        help="cross-check each CVaR against adaptive quadrature")
    p_risk.add_argument("--tol", type=float, default=1e-8,
                        help="verification tolerance (default 1e-8)")
    p_risk.add_argument("--unsafe", action="store_true",
                        help="skip the feasibility gate")
    p_risk.add_argument("--output", default="-",
                        help="output path (default stdout)")

    p_check = sub.add_parser(
        "check", help="feasibility diagnostics for a coefficient vector"
    )
    p_check.add_argument("--coeffs", required=True,
                         help="coefficient JSON ('-' for stdin)")
    p_check.add_argument("--grid", type=int, default=1000,
                         help="feasibility grid size (default 1000)")
    p_check.add_argument("--output", default="-",
                         help="output path (default stdout)")
    return parser


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _load_coefficients(path: str) -> MetalogCoefficients:
    # FitResult JSON is a superset of coefficient JSON, so fit output can
    # be piped straight into risk/eval/check.
    return MetalogCoefficients.from_json(_read_text(path))


def _cmd_fit(args) -> int:
    if args.input == "-":
        points = read_quantile_csv(sys.stdin)
    else:
        points = read_quantile_csv(args.input)
    result = fit(points, args.n)
    _write_text(args.output, dumps(result.to_dict()) + "\n")
    if args.strict_feasible and not result.feasible:
        print("fit: coefficient vector is infeasible (see feasible flag)",
              file=sys.stderr)
        return _EXIT_INFEASIBLE
    return _EXIT_OK


def _cmd_eval(args) -> int:
    c = _load_coefficients(args.coeffs)
    if args.grid:
        if args.grid < 1:
            raise ValueError(f"--grid must be positive, got {args.grid}")
        levels = [(i + 1) / (args.grid + 1) for i in range(args.grid)]
    else:
        levels = [float(ProbLevel(a)) for a in args.alpha]
        if not levels:
            raise ValueError("eval needs --alpha levels or --grid N")
    qs = [quantile(c, p) for p in levels]
    dens = [quantile_density(c, p) for p in levels]
    pdfs = [1.0 / d if d > 0.0 else None for d in dens]
    if args.dump:
        lines = ["# p quantile pdf"]
        for p, q, f in zip(levels, qs, pdfs):
            f_txt = format_real(f) if f is not None else "nan"
            lines.append(f"{format_real(p)} {format_real(q)} {f_txt}")
        _write_text(args.output, "\n".join(lines) + "\n")
    else:
        doc = {"p": levels, "quantile": qs, "pdf": pdfs}
        _write_text(args.output, dumps(doc) + "\n")
    return _EXIT_OK


def _cmd_risk(args) -> int:
    c = _load_coefficients(args.coeffs)
    if not args.alpha:
        raise ValueError("risk needs at least one --alpha level")
    if not args.unsafe:
        verdict = is_feasible(c)
        if not verdict.feasible:
            print(
                "risk: infeasible coefficient vector "
                f"(quantile density {format_real(verdict.density_min)} at "
                f"p = {format_real(verdict.p_min)}); pass --unsafe to proceed",
                file=sys.stderr,
            )
            return _EXIT_INFEASIBLE
    report = risk_report(c, args.alpha, args.threshold)
    exit_code = _EXIT_OK
    if args.verify:
        if not args.tol > 0.0:
            raise ValueError(f"--tol must be positive, got {args.tol}")
        oracle_tol = max(
            min(_VERIFY_ORACLE_CAP, args.tol * _VERIFY_ORACLE_FACTOR),
            _VERIFY_ORACLE_FLOOR,
        )
        diffs = []
        for alpha, closed in zip(report["alpha"], report["cvar"]):
            numeric = cvar_numeric(c, alpha, oracle_tol)
            diffs.append(abs(closed - numeric))
        report["oracle_abs_diff"] = diffs
        if any(d > args.tol for d in diffs):
            exit_code = _EXIT_VERIFY_FAILED
    _write_text(args.output, dumps(report) + "\n")
    return exit_code


def _cmd_check(args) -> int:
    c = _load_coefficients(args.coeffs)
    verdict = is_feasible(c, args.grid)
    lines = [
        f"n: {c.n}",
        f"feasible: {'true' if verdict.feasible else 'false'}",
        f"min_quantile_density: {format_real(verdict.density_min)}",
        f"argmin_p: {format_real(verdict.p_min)}",
    ]
    if c.n == 6:
        # The six-term tail expectation has a second, hypergeometric-free
        # form; report the worst disagreement as a self-diagnostic.
        grid = np.arange(1, 100) / 100.0
        worst = max(
            abs(cvar(c, al).total - cvar6_corollary(c, al)) for al in grid
        )
        lines.append(f"corollary_max_abs_diff: {format_real(worst)}")
    _write_text(args.output, "\n".join(lines) + "\n")
    return _EXIT_OK if verdict.feasible else _EXIT_INFEASIBLE


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "fit": _cmd_fit,
        "eval": _cmd_eval,
        "risk": _cmd_risk,
        "check": _cmd_check,
    }[args.command]
    try:
        return handler(args)
    except (CsvFormatError, RankDeficiencyError) as exc:
        print(f"metalog-risk {args.command}: {exc}", file=sys.stderr)
        return _EXIT_BAD_INPUT
    except InfeasibleError as exc:
        print(f"metalog-risk {args.command}: infeasible: {exc}", file=sys.stderr)
        return _EXIT_INFEASIBLE
    except ToleranceNotReachedError as exc:
        print(f"metalog-risk {args.command}: quadrature: {exc}", file=sys.stderr)
        return _EXIT_BAD_INPUT
    except (ValueError, OSError) as exc:
        print(f"metalog-risk {args.command}: {exc}", file=sys.stderr)
        return _EXIT_BAD_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
