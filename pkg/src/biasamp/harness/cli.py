"""Command-line entry point.

One subcommand per experiment kind plus ``export-model``. Each accepts
``--config <path>`` (flat key=value file; optional — defaults alone give a
runnable desk-scale experiment) and the overrides ``--seed``, ``--runs``,
``--out``; dataset-backed commands also take ``--dataset`` and
``--label-col``. On success the output path is printed and the exit code
is 0; any failure prints a single JSON line to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, read_config
from .experiments import (
    EXPERIMENT_KINDS,
    EXPORT_KIND,
    ExperimentError,
    build_experiment_config,
    run_experiment,
    run_export,
)
from .io import DataFormatError

# subcommand name -> experiment kind
_COMMANDS = {
    "theory-curve": "theory-curve",
    "weak-sweep": "weak-sweep",
    "variance-sweep": "variance-sweep",
    "size-sweep": "size-sweep",
    "loss-compare": "loss-comparison",
    "gnb-eval": "dataset-eval",
    "mitigate": "mitigation-eval",
    "export-model": EXPORT_KIND,
}

_DATASET_COMMANDS = ("gnb-eval", "mitigate", "export-model")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biasamp",
        description=(
            "Bias-amplification experiments for binary linear classifiers: "
            "closed-form curves, synthetic SGD sweeps, naive-Bayes dataset "
            "evaluation, and mitigation scorecards."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "theory-curve": "closed-form bias of the optimal classifier vs class prior",
        "weak-sweep": "predicted-positive rate vs number of weak features",
        "variance-sweep": "predicted-positive rate vs weak-feature variance",
        "size-sweep": "weak-coefficient overestimation vs training-set size",
        "loss-compare": "bias vs feature count for each SGD loss",
        "gnb-eval": "naive-Bayes bias report over stratified splits of a CSV",
        "mitigate": "parity / expert / l1 mitigation scorecard",
        "export-model": "train one model and write the portable text format",
    }
    for command, kind in _COMMANDS.items():
        p = sub.add_parser(command, help=helps[command])
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--runs", type=int, help="training-runs override")
        p.add_argument("--out", help="output path override")
        if command in _DATASET_COMMANDS:
            p.add_argument("--dataset", help="input CSV (header row required)")
            p.add_argument("--label-col", help="label column name or index")
        p.set_defaults(kind=kind)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        settings = read_config(args.config) if args.config else {}
        overrides: dict[str, str | None] = {
            "master_seed": None if args.seed is None else str(args.seed),
            "runs": None if args.runs is None else str(args.runs),
            "out": args.out,
            "dataset": getattr(args, "dataset", None),
            "label_col": getattr(args, "label_col", None),
        }
        cfg = build_experiment_config(args.kind, settings, overrides)
        out = run_export(cfg) if cfg.kind == EXPORT_KIND else run_experiment(cfg)
    except (ConfigError, DataFormatError, ExperimentError, OSError, ValueError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
