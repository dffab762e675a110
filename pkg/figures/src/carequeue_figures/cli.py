"""Command-line front end: one subcommand per figure id.

Exit codes: 0 on success (including an empty input, which renders empty
axes with a warning), 2 on a schema or flag error, 1 on other failures.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .csvdata import SchemaError
from .render import FIGURE_IDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carequeue-figures",
        description="Render figures from carequeue CSV artifacts.")
    parser.add_argument("--version", action="version",
                        version=f"carequeue-figures {__version__}")
    sub = parser.add_subparsers(dest="figure", required=True)
    for fid in FIGURE_IDS:
        p = sub.add_parser(fid, help=f"render the {fid} figure")
        p.add_argument("--csv", required=True, help="input CSV artifact")
        p.add_argument("--out", default=None,
                       help=f"output image (default {fid}.png)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or f"{args.figure}.png"
    try:
        result = render(FigureSpec(args.figure, args.csv, out))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    detail = ""
    if result.crossing is not None:
        detail = f" (crossing at a = {result.crossing:.4f})"
    print(f"{args.figure}: {result.rows} rows -> {result.out_path}{detail}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
