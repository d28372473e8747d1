"""Command line entry point: ``convlab list | verify | emit``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import witnesses as W
from .harness import emit as E
from .harness.report import default_precision
from .harness.scenarios import SCENARIO_IDS, UnknownScenario, default_params, run_scenario, scenario

USAGE_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _eps(text: str) -> tuple[str, ...]:
    try:
        vals = [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("eps values must be positive")
    return tuple(str(v) for v in vals)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convlab", description="Certified checks for convergence-mode witnesses.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", help="list scenario ids")

    v = sub.add_parser("verify", help="run one scenario")
    v.add_argument("scenario")
    v.add_argument("--horizon", type=_positive)
    v.add_argument("--eps", type=_eps)
    v.add_argument("--samples", type=_positive)
    v.add_argument("--k-max", type=_positive)
    v.add_argument("--polys", type=_positive)
    v.add_argument("--seed", type=_nonneg, default=0)
    v.add_argument("--precision", type=_positive)
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--out")

    e = sub.add_parser("emit", help="write sample values of a family as CSV")
    e.add_argument("family")
    e.add_argument("--n", required=True)
    e.add_argument("--grid", required=True)
    e.add_argument("--out", required=True)
    return p


def _verify(args) -> int:
    try:
        scenario(args.scenario)
    except UnknownScenario:
        print(f"unknown scenario {args.scenario!r}; known: {', '.join(SCENARIO_IDS)}", file=sys.stderr)
        return USAGE_ERROR
    try:
        params = default_params(args.scenario, seed=args.seed, precision=args.precision or default_precision())
        params = params.with_overrides(
            horizon=args.horizon, eps=args.eps, samples=args.samples, k_max=args.k_max, polys=args.polys
        )
    except ValueError as exc:
        print(f"bad parameters: {exc}", file=sys.stderr)
        return USAGE_ERROR
    report = run_scenario(args.scenario, params)
    text = report.to_json() if args.format == "json" else report.to_text()
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return USAGE_ERROR
    else:
        print(text)
    return report.exit_code()


def _emit(args) -> int:
    try:
        ns = E.parse_n_list(args.n)
        rows = E.emit_samples(args.family, ns, args.grid, args.out)
    except W.UnknownFamily as exc:
        print(f"unknown family: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, E.IoFailure) as exc:
        print(str(exc), file=sys.stderr)
        return USAGE_ERROR
    print(f"wrote {rows} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for sid in SCENARIO_IDS:
            print(f"{sid}\t{scenario(sid).title}")
        return 0
    if args.command == "verify":
        return _verify(args)
    return _emit(args)


if __name__ == "__main__":
    sys.exit(main())
