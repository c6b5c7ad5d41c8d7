"""plot <kind> --in CSV --out PNG"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureRequest, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render quditswap sweep CSVs into figures."
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="csv_path", required=True, help="sweep CSV")
    parser.add_argument("--out", dest="output_path", required=True, help="output image")
    parser.add_argument("--gate", help="gate label filter for heatmap grids")
    parser.add_argument(
        "--anchor", type=float, default=1e-4, help="collapse normalization shift (eps/xi)"
    )
    parser.add_argument(
        "--color-bounds",
        nargs=2,
        type=float,
        default=(0.0, 1.0),
        metavar=("LO", "HI"),
        help="fixed heatmap color scale",
    )
    args = parser.parse_args(argv)
    try:
        out = render(
            FigureRequest(
                csv_path=args.csv_path,
                output_path=args.output_path,
                kind=args.kind,
                color_bounds=tuple(args.color_bounds),
                gate=args.gate,
                anchor_eps=args.anchor,
            )
        )
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
