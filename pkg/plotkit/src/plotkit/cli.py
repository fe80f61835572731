"""plot-results: sweep CSV in, figure plus series sidecar out.

Exit codes: 0 success, 2 validation (schema mismatch, empty selection, bad
flags), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .render import EmptySelectionError, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-results",
        description="Render an intersketch sweep CSV into a figure and a "
        "deterministic .series.json sidecar.",
    )
    parser.add_argument("csv", help="results CSV in the sweep schema")
    parser.add_argument("--kind", choices=("bias", "variance", "improvement"), required=True)
    parser.add_argument("--f", type=float, required=True, help="f value to select")
    parser.add_argument("--m", type=int, default=None,
                        help="m value to select (optional for --kind bias: all m)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind, f=args.f, m=args.m,
            out_dir=Path(args.out), image_format=args.format,
        )
        image_path, sidecar_path = render(args.csv, spec)
    except (SchemaError, EmptySelectionError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    print(image_path)
    print(sidecar_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
