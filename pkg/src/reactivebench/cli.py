"""Benchmark command line.

``reactivebench run`` executes one scenario file on the selected runtimes
for N repetitions and writes a JSON or CSV report; ``reactivebench compare``
merges two or more JSON reports into a pairwise comparison table.

Exit status: 0 on success, 1 when a runtime's terminal value disagrees with
the oracle, 2 on configuration, file, or schema errors. Counter fields in
reports are deterministic functions of (scenario, seed); only fields under
``timing`` vary between runs. The default output directory can be set with
the REACTIVEBENCH_OUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from .report import (
    IncompatibleReportError,
    build_report,
    compare_reports,
    report_to_csv,
    report_to_json,
)
from .scenarios import (
    RUNTIMES,
    InvalidScenarioError,
    load_scenario,
    oracle,
    run_repeated,
)

__all__ = ["main"]

OUT_DIR_ENV = "REACTIVEBENCH_OUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reactivebench",
        description="Benchmark the signal runtime against the observable and store baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write a report")
    run_p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    run_p.add_argument(
        "--runtime",
        choices=[*RUNTIMES, "all"],
        default="all",
        help="runtime selection (default: all)",
    )
    run_p.add_argument(
        "--reps",
        type=int,
        default=30,
        help="repetitions per runtime (default: 30)",
    )
    run_p.add_argument("--seed", type=int, default=0, help="seed for report statistics")
    run_p.add_argument("--format", choices=["json", "csv"], default="json")
    run_p.add_argument("--out", default=None, help="output path (default: report-<digest>.<fmt>)")
    run_p.add_argument("--weights", default=None, help="metric weights JSON file")
    run_p.add_argument(
        "--bootstrap-iters",
        type=int,
        default=10_000,
        help="bootstrap resampling iterations (default: 10000)",
    )

    cmp_p = sub.add_parser("compare", help="merge reports into a comparison table")
    cmp_p.add_argument("reports", nargs="+", help="two or more JSON report files")
    cmp_p.add_argument("--out", default=None, help="write the merged table as JSON")
    return parser


def _load_weights(path: str | None) -> dict[str, Any] | None:
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or not isinstance(data.get("metrics", {}), dict):
        raise InvalidScenarioError("weights file must be an object with a 'metrics' mapping")
    return data


def _default_out(name: str, fmt: str) -> str:
    out_dir = os.environ.get(OUT_DIR_ENV, ".")
    return os.path.join(out_dir, f"{name}.{fmt}")


def _cmd_run(args: argparse.Namespace) -> int:
    if args.reps < 1:
        print("error: --reps must be >= 1", file=sys.stderr)
        return 2
    try:
        spec = load_scenario(args.scenario)
        weights = _load_weights(args.weights)
    except (OSError, InvalidScenarioError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    runtimes = list(RUNTIMES) if args.runtime == "all" else [args.runtime]
    traces = {}
    try:
        for runtime in runtimes:
            traces[runtime] = run_repeated(runtime, spec, args.reps)
    except InvalidScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = build_report(
        spec,
        traces,
        seed=args.seed,
        repetitions=args.reps,
        weights=weights,
        bootstrap_iters=args.bootstrap_iters,
    )
    out_path = args.out or _default_out(f"report-{spec.digest()}", args.format)
    payload = report_to_json(report) if args.format == "json" else report_to_csv(report)
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    expected = oracle(spec)
    for runtime in runtimes:
        section = report["runtimes"][runtime]
        print(
            f"{runtime}: work={section['totals']['work']} "
            f"notifications={section['totals']['notifications']} "
            f"terminal={section['terminal_value']}"
        )
    print(f"report written to {out_path}")
    mismatched = [rt for rt in runtimes if not report["runtimes"][rt]["oracle_match"]]
    if mismatched:
        for runtime in mismatched:
            got = report["runtimes"][runtime]["terminal_value"]
            print(
                f"error: oracle mismatch on {runtime}: terminal {got} != expected {expected}",
                file=sys.stderr,
            )
        return 1
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    loaded: list[tuple[str, dict]] = []
    for path in args.reports:
        try:
            with open(path, encoding="utf-8") as fh:
                loaded.append((os.path.basename(path), json.load(fh)))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read report {path}: {exc}", file=sys.stderr)
            return 2
    try:
        table = compare_reports(loaded)
    except IncompatibleReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    header = f"{'left':<28} {'right':<28} {'metric':<26} {'p':>8} {'p_bh':>8} {'cliffs_d':>9}"
    print(header)
    for row in table["comparisons"]:
        print(
            f"{row['left']:<28} {row['right']:<28} {row['metric']:<26} "
            f"{row['p']:>8.4f} {row['p_bh']:>8.4f} {row['cliffs_d']:>9.4f}"
        )
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(table, sort_keys=True, indent=2) + "\n")
        except OSError as exc:
            print(f"error: cannot write table: {exc}", file=sys.stderr)
            return 2
        print(f"table written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_compare(args)


if __name__ == "__main__":
    sys.exit(main())
