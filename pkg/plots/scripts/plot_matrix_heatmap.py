#!/usr/bin/env python3
"""Render a square matrix CSV (disparity or separability) as an SVG heatmap
on a fixed [0, 1] color scale."""

import argparse
import sys

from shiftplots import PlotInputError, plot_matrix_heatmap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="in_path", required=True, help="matrix CSV")
    ap.add_argument("--out", required=True, help="output SVG path")
    args = ap.parse_args()
    try:
        plot_matrix_heatmap(args.in_path, args.out)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
