"""Command line front end: run experiments, re-plot and aggregate fits.

Exit codes: 0 success, 1 tool error, 2 bound-violation verdicts.
The default output root comes from the SPECBOUND_OUT environment variable
when set; --out overrides both.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .experiments import fit_from_manifests, plot_from_manifest, run
from .manifest import read_manifest

__all__ = ["main"]

ENV_OUT = "SPECBOUND_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specbound",
        description="spectral-enclosure experiments: run, plot, fit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to the key = value config file")
    p_run.add_argument("--out", help="output root directory")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--threads", type=int, help="worker processes for samples")
    p_run.add_argument(
        "--strict", action="store_true", help="escalate warnings to failures"
    )

    p_plot = sub.add_parser("plot", help="re-render plots from a result manifest")
    p_plot.add_argument("manifest", help="manifest file or run directory")
    p_plot.add_argument("--out", help="directory for the rendered plot")

    p_fit = sub.add_parser("fit", help="aggregate fitted constants over manifests")
    p_fit.add_argument("manifests", nargs="+", help="manifest files or run directories")
    p_fit.add_argument("--out", help="CSV file for the aggregated table")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            out = args.out or os.environ.get(ENV_OUT)
            status, manifest = run(
                cfg,
                out=out,
                seed=args.seed,
                threads=args.threads,
                strict=args.strict,
            )
            print(f"manifest: {manifest}")
            return status
        if args.command == "plot":
            path = plot_from_manifest(read_manifest(args.manifest), out=args.out)
            print(f"plot: {path}")
            return 0
        if args.command == "fit":
            overall, rows = fit_from_manifests(
                [read_manifest(m) for m in args.manifests], out=args.out
            )
            print(f"samples: {len(rows)}")
            print(f"c_emp: {overall!r}")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
