"""Command-line entry point: ``distressbench <stage> [options]``."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import DistressBenchError
from .pipeline import STAGES, Pipeline

COMMANDS = (*STAGES, "run")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML or JSON run configuration")
    common.add_argument("--horizon", type=int, action="append", metavar="H", help="horizon to run (repeatable)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--force", action="store_true", help="rerun even when inputs are unchanged")
    common.add_argument("--mock-llm", action="store_true", help="answer prompts with the bundled mock endpoint")
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="distressbench", description="Bankruptcy-prediction benchmark pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "write the company-year panel (synthetic or ingested CSV)",
        "label": "build horizon-h labeled datasets",
        "featurize": "compute the feature table, splits and preprocessing statistics",
        "train": "grid-search models and calibrate thresholds",
        "evaluate": "score the test subset and time inference",
        "llm-run": "run the prompting protocol (zero-shot and in-context)",
        "report": "write per-horizon reports and the horizon summary table",
        "run": "all stages in order",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, {"seed": args.seed, "horizons": args.horizon})
        pipe = Pipeline(config, out=args.out, force=args.force, mock_llm=args.mock_llm)
        if not args.quiet:
            pipe.log = lambda msg: print(msg, file=sys.stderr)
        if args.command == "run":
            pipe.run_all()
        else:
            pipe.run_stage(args.command)
        if args.command in ("report", "run") and not args.quiet:
            for h in config.horizons:
                print((pipe.out / "reports" / f"h{h}.txt").read_text(), end="")
    except DistressBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
