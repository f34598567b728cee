"""Command-line renderer: ``vecont-figs --in <dir> --out <dir> [--kinds ...]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KNOWN_KINDS, RenderJob, SchemaMismatch, UnknownKind, load_figure_data, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vecont-figs",
        description="Render figure-data JSON files into PNG charts.",
    )
    parser.add_argument("--in", dest="in_dir", required=True, help="directory of figure-data JSON")
    parser.add_argument("--out", dest="out_dir", required=True, help="directory for images")
    parser.add_argument(
        "--kinds", nargs="*", choices=KNOWN_KINDS, default=None,
        help="render only these chart kinds",
    )
    parser.add_argument("--dpi", type=int, default=120)
    parser.add_argument("--label-budget", type=int, default=20)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    if not in_dir.is_dir():
        print(f"error: input directory {in_dir} does not exist", file=sys.stderr)
        return 2
    inputs = sorted(in_dir.glob("*.json"))
    if not inputs:
        print(f"error: no figure data found in {in_dir}", file=sys.stderr)
        return 2
    rendered = 0
    for path in inputs:
        try:
            data = load_figure_data(path)
            if args.kinds and data["kind"] not in args.kinds:
                continue
            job = RenderJob(
                input_path=path,
                output_path=out_dir / (path.stem + ".png"),
                dpi=args.dpi,
                label_budget=args.label_budget,
            )
            render(job)
            rendered += 1
        except (SchemaMismatch, UnknownKind) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    print(f"rendered {rendered} figures to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
