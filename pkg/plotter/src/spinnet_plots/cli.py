"""plot_figures command: render one figure from spinnet CSV files."""

from __future__ import annotations

import argparse
import os
import sys

from .figures import FIGURES, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot_figures",
        description="Render a figure (1-5) from spinnet CSV series files.",
    )
    parser.add_argument("figure_id", type=int, choices=sorted(FIGURES),
                        help="which figure to draw")
    parser.add_argument("--csv", action="append", required=True, metavar="PATH[:LABEL]",
                        help="input CSV with optional curve label; repeatable")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--inset", metavar="T0:T1",
                        help="add a zoomed inset over the time window [T0, T1]")
    return parser


def _parse_csv_arg(raw: str):
    if ":" in raw:
        path, label = raw.rsplit(":", 1)
        if path and label:
            return path, label
    stem = os.path.basename(raw)
    return raw, stem[:-4] if stem.endswith(".csv") else stem


def _parse_inset(raw: str):
    try:
        t0, t1 = (float(part) for part in raw.split(":"))
    except ValueError:
        raise ValueError(f"inset must be T0:T1 with numeric bounds, got {raw!r}") from None
    return t0, t1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inputs = [_parse_csv_arg(raw) for raw in args.csv]
        inset = _parse_inset(args.inset) if args.inset else None
        render(args.figure_id, inputs, args.out, inset=inset)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.out)
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
