"""Command line entry point: ``fedclus run | compare | plot``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from .config import apply_overrides, config_from_dict
from .errors import ConfigError, ReportParseError
from .federation import run_cells
from .plots import write_plots
from .report import FINAL_METRIC_NAMES, METRIC_NAMES, ExperimentReport, summarize

log = logging.getLogger("fedclus")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
SUMMARY_FIELDS = ("min", "q1", "median", "mean", "max")


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage


def _num(v) -> str:
    return repr(float(v))


def load_config(path, overrides=()):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(apply_overrides(raw, list(overrides)))


def execute(config, keep_messages: bool = True):
    """Run every cell; returns the report (no timestamp yet) and the flat ledger rows."""
    cells = [(a, s) for s in config.seeds for a in config.algorithms]
    try:
        results = run_cells(config, cells, keep_messages=keep_messages)
    except Exception as exc:  # noqa: BLE001 - wrapped with stage context
        raise StageError("run", exc) from exc
    runs = [r for r, _ in results]
    ledger = []
    for run, rounds in results:
        for rep in rounds:
            for m in rep.messages:
                ledger.append((run.seed, run.algorithm, m.round, m.src, m.dst, m.link, m.payload_bytes))
    summary, deltas = summarize(runs)
    return ExperimentReport(config.to_dict(), runs, summary, deltas), ledger


def write_report(report: ExperimentReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=1) + "\n", encoding="utf-8")


def read_report(path) -> ExperimentReport:
    try:
        return ExperimentReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ReportParseError(f"{path}: {exc}") from exc


def write_rounds_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "seed", "algorithm", *METRIC_NAMES])
        for run in report.runs:
            for r in run.rounds:
                w.writerow([r.round, run.seed, run.algorithm, *(_num(getattr(r, m)) for m in METRIC_NAMES)])


def write_ledger_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "algorithm", "round", "src", "dst", "link", "payload_bytes"])
        w.writerows(rows)


def write_compare_csv(report: ExperimentReport, path) -> None:
    """Rows ``summary,<algorithm>,<metric>,...`` then ``delta,<a-b>,<metric>,...``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "name", "metric", *SUMMARY_FIELDS])
        for section, table in (("summary", report.summary), ("delta", report.deltas)):
            for name, metrics in table.items():
                for m in FINAL_METRIC_NAMES:
                    w.writerow([section, name, m, *(_num(metrics[m][f]) for f in SUMMARY_FIELDS)])


def _finish(report: ExperimentReport, ledger, out: Path, compare: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    report.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    write_report(report, out / "report.json")
    write_rounds_csv(report, out / "rounds.csv")
    write_ledger_csv(ledger, out / "ledger.csv")
    if compare:
        write_compare_csv(report, out / "compare.csv")


def cmd_run(config_path, out=None, overrides=(), compare: bool = False) -> int:
    try:
        config = load_config(config_path, overrides)
        if compare and len(config.algorithms) < 2:
            raise ConfigError("compare needs at least two algorithms")
    except ConfigError as exc:
        print(f"fedclus: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(out or config.output_dir)
    try:
        report, ledger = execute(config)
        _finish(report, ledger, out_dir, compare)
    except StageError as exc:
        print(f"fedclus: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"fedclus: [write] {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("wrote results to %s", out_dir)
    return EXIT_OK


def cmd_compare(config_path, out=None, overrides=()) -> int:
    return cmd_run(config_path, out, overrides, compare=True)


def emit_plots(report_path, out_dir) -> int:
    try:
        report = read_report(report_path)
        write_plots(report, out_dir)
    except ReportParseError as exc:
        print(f"fedclus: [plot] {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError, IndexError) as exc:
        print(f"fedclus: [plot] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedclus", description="Clustered federated FDIA detection simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p = sub.add_parser("plot")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out, args.override)
    if args.command == "compare":
        return cmd_compare(args.config, args.out, args.override)
    return emit_plots(args.report, args.out)


if __name__ == "__main__":
    sys.exit(main())
