"""Command line interface.

Subcommands: `run` executes an experiment config, `summarize` builds
comparison tables from a results directory, `indicators` scores a front
CSV against a reference CSV, and `fronts` exports reference fronts.
Exit codes: 0 success, 1 configuration error, 2 missing data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import ConfigurationError, ContractViolation
from .harness import parse_config, run_experiment, summarize
from .indicators import IndicatorResult, igd, normalized_hv
from .lsmop import load_front_csv, sample_reference_front, save_front_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmoam",
        description="Benchmark harness for the attention-guided large-scale multiobjective optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run every cell of an experiment config")
    run_p.add_argument("config", help="experiment config file (key = value with [section] headers)")

    sum_p = sub.add_parser("summarize", help="emit median/symbol tables from a results directory")
    sum_p.add_argument("results_dir", help="directory previously written by `run`")

    ind_p = sub.add_parser("indicators", help="score a front CSV against a reference front CSV")
    ind_p.add_argument("--front", required=True, help="attained front, one objective vector per line")
    ind_p.add_argument("--reference", required=True, help="reference front CSV")

    fr_p = sub.add_parser("fronts", help="export a reference Pareto front as CSV")
    fr_p.add_argument("--problem", type=int, required=True, help="LSMOP id in 1..9")
    fr_p.add_argument("--m", type=int, default=3, help="objective count (default 3)")
    fr_p.add_argument("--points", type=int, default=10_000, help="sample count (default 10000)")
    fr_p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    results = run_experiment(cfg)
    print(f"results written to {results}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    directory = Path(args.results_dir)
    if not (directory / "results.csv").is_file():
        print(f"error: no results.csv under {directory}", file=sys.stderr)
        return EXIT_MISSING
    status = summarize(directory)
    print(f"tables written under {directory}")
    if status != 0:
        print("warning: some cells were absent", file=sys.stderr)
    return status


def _cmd_indicators(args) -> int:
    front_path = Path(args.front)
    reference_path = Path(args.reference)
    for path in (front_path, reference_path):
        if not path.is_file():
            print(f"error: file not found: {path}", file=sys.stderr)
            return EXIT_MISSING
    front = load_front_csv(front_path)
    reference = load_front_csv(reference_path)
    results = [
        IndicatorResult("IGD", igd(front, reference), front.size, str(reference_path)),
        IndicatorResult("HV", normalized_hv(front, reference), front.size, str(reference_path)),
    ]
    print("indicator,value,front_size,reference")
    for res in results:
        print(f"{res.name},{res.value:.5e},{res.front_size},{res.reference_descriptor}")
    return EXIT_OK


def _cmd_fronts(args) -> int:
    front = sample_reference_front(args.problem, args.m, args.points)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_front_csv(front, out)
    print(f"{front.size} points written to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "summarize": _cmd_summarize,
        "indicators": _cmd_indicators,
        "fronts": _cmd_fronts,
    }
    try:
        return handlers[args.command](args)
    except (ConfigurationError, ContractViolation) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING


if __name__ == "__main__":
    sys.exit(main())
