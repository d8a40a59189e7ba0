"""Command-line experiment runner.

Usage:
    indproc --config experiment.json [--seed N] [--paths N] [--out DIR] [--threads N]
    indproc --plotdata RUN_DIR [--out DIR]

Exit codes: 0 all cells within tolerance, 1 tolerance failure,
2 usage/configuration error.  The thread count never changes results:
paths are chunked and reduced in a fixed order, so re-running with a
different --threads (or INDPROC_THREADS) reproduces the output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    config_from_dict,
    plotdata_rows,
    read_results_csv,
    run_experiment,
    write_plotdata_csv,
    write_report_json,
    write_results_csv,
)

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indproc",
        description="Run a named Monte Carlo verification experiment from a JSON config.",
    )
    parser.add_argument("--config", type=Path, help="experiment config JSON")
    parser.add_argument("--plotdata", type=Path, metavar="RUN_DIR",
                        help="emit plot-ready CSV from a previous run directory")
    parser.add_argument("--seed", type=int, help="override the config master seed")
    parser.add_argument("--paths", type=int, help="override the config path count")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--threads", type=int,
                        help="worker threads (default: INDPROC_THREADS or 1); "
                             "does not affect results")
    return parser


def _thread_count(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("INDPROC_THREADS")
    return max(1, int(env)) if env else 1


def _run_config(args) -> int:
    try:
        data = json.loads(args.config.read_text())
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE

    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.paths is not None:
        overrides["n_paths"] = args.paths
    data.update(overrides)

    try:
        config = config_from_dict(data)
        out_dir = Path(args.out) if args.out else Path(config.output_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        result = run_experiment(config, n_threads=_thread_count(args.threads))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    with open(out_dir / "results.csv", "w", newline="") as fh:
        write_results_csv(result.rows, fh)
    with open(out_dir / "report.json", "w") as fh:
        write_report_json(result.report, fh)

    status = "PASS" if result.passed else "FAIL"
    print(f"{config.experiment}: {status}  max_sigma_ratio={result.report['max_sigma_ratio']:.3f}  "
          f"paths={config.n_paths}  wall={result.report['wall_time_s']:.2f}s")
    if result.report.get("low_power"):
        print(f"warning: low-power run (n_paths={config.n_paths} < 1000); "
              "tolerances are unreliable", file=sys.stderr)
    return EXIT_PASS if result.passed else EXIT_TOLERANCE


def _run_plotdata(args) -> int:
    run_dir = args.plotdata
    report_path = run_dir / "report.json"
    results_path = run_dir / "results.csv"
    if not report_path.is_file() or not results_path.is_file():
        print(f"error: {run_dir} does not contain report.json and results.csv",
              file=sys.stderr)
        return EXIT_USAGE
    report = json.loads(report_path.read_text())
    with open(results_path, newline="") as fh:
        rows = read_results_csv(fh)
    out_dir = Path(args.out) if args.out else run_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "plot.csv", "w", newline="") as fh:
        write_plotdata_csv(plotdata_rows(report, rows), fh)
    print(f"wrote {out_dir / 'plot.csv'}")
    return EXIT_PASS


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if (args.config is None) == (args.plotdata is None):
        print("error: exactly one of --config or --plotdata is required", file=sys.stderr)
        return EXIT_USAGE
    if args.plotdata is not None:
        return _run_plotdata(args)
    return _run_config(args)


if __name__ == "__main__":
    sys.exit(main())
