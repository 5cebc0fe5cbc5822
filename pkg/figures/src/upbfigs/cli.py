"""Command line for rendering simulator CSVs into images."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_KINDS, FigureRequest, SchemaError, SidecarMissingError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="upbsim-figures",
        description="Render upbsim CSV outputs (maps, curves, distributions, brightness)",
    )
    parser.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    parser.add_argument("--input", type=Path, nargs="+", required=True, help="input CSV path(s)")
    parser.add_argument("--output", type=Path, required=True, help="output image path")
    parser.add_argument("--value-column", default=None, help="map value column (when ambiguous)")
    parser.add_argument("--title", default="")
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    labels = (args.xlabel, args.ylabel) if args.xlabel and args.ylabel else None
    request = FigureRequest(
        inputs=tuple(args.input),
        kind=args.kind,
        output=args.output,
        value_column=args.value_column,
        title=args.title,
        labels=labels,
    )
    try:
        path = render(request)
    except (SidecarMissingError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
