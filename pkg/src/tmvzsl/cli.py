"""Command-line front end.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure. Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import load_config
from .errors import NumericalError, SingularSystemError, TmvzslError
from . import pipeline

SUBCOMMANDS = (
    "validate",
    "fit-projection",
    "fit-embedding",
    "zsl",
    "mlzsl",
    "synth",
    "export-embedding",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmvzsl",
        description="Transductive multi-view zero-shot learning on "
                    "precomputed feature matrices",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to key=value config")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (repeatable)",
        )
    return parser


def _print_summary(summary: dict) -> None:
    for key, value in summary.items():
        if isinstance(value, float):
            print(f"{key}: {value:.6f}")
        else:
            print(f"{key}: {value}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides=args.override)
        if args.subcommand == "validate":
            for line in pipeline.validate_inputs(cfg):
                print(line)
        elif args.subcommand == "fit-projection":
            for line in pipeline.run_fit_projection(cfg):
                print(line)
        elif args.subcommand == "fit-embedding":
            for line in pipeline.run_fit_embedding(cfg):
                print(line)
        elif args.subcommand == "export-embedding":
            for line in pipeline.run_export_embedding(cfg):
                print(line)
        elif args.subcommand == "zsl":
            _print_summary(pipeline.run_zsl(cfg))
        elif args.subcommand == "mlzsl":
            _print_summary(pipeline.run_mlzsl(cfg))
        elif args.subcommand == "synth":
            _print_summary(pipeline.run_synth(cfg))
    except (NumericalError, SingularSystemError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except TmvzslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
