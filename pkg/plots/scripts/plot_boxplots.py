#!/usr/bin/env python3
"""Render boxplots of one runs-file metric to SVG.

Global metrics (conditional_shift, marginal_shift) get one box per
normalization scheme; per-subject metrics (train_acc, test_acc, gap) get
one box per subject, grouped by scheme.
"""

import argparse
import sys

from shiftplots import PlotInputError, plot_boxplots


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="in_path", required=True, help="runs CSV")
    ap.add_argument("--metric", required=True,
                    help="conditional_shift, marginal_shift, train_acc, "
                         "test_acc, or gap")
    ap.add_argument("--out", required=True, help="output SVG path")
    args = ap.parse_args()
    try:
        plot_boxplots(args.in_path, args.metric, args.out)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
