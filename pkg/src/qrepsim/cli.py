"""Command line front end.

One subcommand per experiment.  Flags override config-file values.  With no
--out the rendered table goes to stdout.
"""
from __future__ import annotations

import argparse
import sys

from .harness import (
    EXPERIMENTS,
    default_spec,
    emit,
    load_spec,
    render_rows_csv,
    render_rows_json,
    run_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrepsim",
        description="Entanglement distribution, purification, swapping and repeater experiments.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="INI config file")
        p.add_argument("--seed", type=int, help="RNG seed (nonnegative)")
        p.add_argument("--trials", type=int, help="sampled-mode trial count")
        p.add_argument("--mode", choices=("exact", "sampled"), help="evaluation mode")
        p.add_argument("--out", help="output file path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.out is not None:
        overrides["out_path"] = args.out
    if args.format is not None:
        overrides["out_format"] = args.format

    try:
        if args.config:
            spec = load_spec(args.config, overrides)
            if spec.experiment != args.experiment:
                raise ValueError(
                    f"config names experiment {spec.experiment!r} but subcommand is {args.experiment!r}"
                )
        else:
            spec = default_spec(args.experiment, overrides)
        rows = run_experiment(spec)
        if spec.out_path:
            emit(rows, spec.out_format, spec.out_path)
        else:
            text = render_rows_csv(rows) if spec.out_format == "csv" else render_rows_json(rows)
            sys.stdout.write(text)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
