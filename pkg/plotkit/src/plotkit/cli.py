"""Command line entry point: render one figure from one CSV file."""

from __future__ import annotations

import argparse
import json
import sys

from .figures import KINDS, FigureSpec, render
from .schema import PlotkitError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a figure from a harness CSV output.",
    )
    parser.add_argument(
        "--kind",
        required=True,
        choices=KINDS,
        help="which figure to draw",
    )
    parser.add_argument(
        "--in",
        dest="in_path",
        required=True,
        metavar="CSV",
        help="input CSV file",
    )
    parser.add_argument(
        "--out",
        required=True,
        metavar="IMG",
        help="output image file (.svg for deterministic vector output)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, csv_path=args.in_path, out_path=args.out)
    try:
        out = render(spec)
    except PlotkitError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 2
    print(json.dumps({"kind": args.kind, "out": str(out)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
