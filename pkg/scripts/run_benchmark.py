"""Desk-scale directional benchmark: all four algorithms on one config.

Writes report.json, rounds.csv, ledger.csv, compare.csv and SVG figures,
then prints the seed-mean accuracy and KS per algorithm.

    python scripts/run_benchmark.py --out results/benchmark
    python scripts/run_benchmark.py --weight-mode literal --out results/benchmark_literal
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fedclus.cli import main, read_report

HERE = Path(__file__).resolve().parent


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=str(HERE / "configs" / "benchmark.json"))
    p.add_argument("--out", default="results/benchmark")
    p.add_argument("--weight-mode", choices=("inverse", "literal"), default=None)
    p.add_argument("--rounds", type=int, default=None, help="override the round count")
    return p.parse_args(argv)


def run(args) -> int:
    overrides = []
    if args.weight_mode:
        overrides += ["--override", f"weight_mode={args.weight_mode}"]
    if args.rounds is not None:
        overrides += ["--override", f"rounds={args.rounds}"]
    code = main(["compare", "--config", args.config, "--out", args.out, *overrides])
    if code:
        return code
    code = main(["plot", "--report", str(Path(args.out) / "report.json"), "--out", args.out])
    if code:
        return code
    report = read_report(Path(args.out) / "report.json")
    print(f"{'algorithm':<18}{'accuracy':>10}{'f1':>10}{'auc':>10}{'ks':>10}")
    for algo, stats in report.summary.items():
        print(f"{algo:<18}" + "".join(f"{stats[m]['mean']:>10.4f}" for m in ("accuracy", "f1", "auc", "ks")))
    for pair, stats in report.deltas.items():
        print(f"delta {pair}: accuracy {stats['accuracy']['mean']:+.4f}  ks {stats['ks']['mean']:+.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
