#!/usr/bin/env python3
"""Render per-subject average disparity as grouped SVG bars, one bar per
normalization scheme within each subject group."""

import argparse
import sys

from shiftplots import PlotInputError, plot_subject_bars


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="in_path", required=True,
                    help="per-subject disparity CSV")
    ap.add_argument("--out", required=True, help="output SVG path")
    args = ap.parse_args()
    try:
        plot_subject_bars(args.in_path, args.out)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
