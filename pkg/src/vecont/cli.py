"""Command-line entry point: ``vecont <stage> --config <path>``.

Exit codes: 0 success, 1 configuration/validation error, 2 missing
artifact (including a missing replay cache), 3 network failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CacheMiss, ConfigError, MissingArtifact, NetworkError
from .pipeline import STAGES, load_config, run_stage

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING_ARTIFACT = 2
EXIT_NETWORK = 3


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation errors, not usage exits."""

    def error(self, message):
        raise ConfigError([message])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vecont",
        description="Staged pipeline: discretize a corpus, extract model placements, analyze them.",
    )
    sub = parser.add_subparsers(dest="stage", metavar="stage")
    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides run.out_dir)")
        if stage == "extract":
            p.add_argument(
                "--mode",
                choices=["live", "record", "replay"],
                default=None,
                help="override llm.mode for this run",
            )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.stage is None:
            raise ConfigError(["a stage is required; choose from " + ", ".join(STAGES)])
        mode = getattr(args, "mode", None)
        cfg = load_config(args.config, out_override=args.out, mode_override=mode)
        run_stage(args.stage, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MissingArtifact, CacheMiss) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except NetworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    print(f"{args.stage}: ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
