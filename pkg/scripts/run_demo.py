#!/usr/bin/env python3
"""Small end-to-end demo: synthesize recordings, extract features, run the
repeated LOSO protocol under every normalization scheme, consolidate.

Finishes in about a minute; outputs land in out/demo by default.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from shiftlab.cli import main as shiftlab


def run(argv):
    code = shiftlab(argv)
    if code != 0:
        sys.exit(code)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/demo", help="output directory")
    ap.add_argument("--config", default="configs/demo_eeg_small.json")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    raw_dir = os.path.join(args.out, "raw")
    feats = os.path.join(args.out, "features.csv")
    study = os.path.join(args.out, "study")

    run(["synth", "--config", args.config, "--out", raw_dir])
    run(["features", "--raw", raw_dir, "--out", feats])
    run(["shift", "--features", feats, "--out", os.path.join(args.out, "shift"),
         "--threads", str(args.threads)])
    run(["loso", "--features", feats, "--out", study, "--all-schemes",
         "--reps", str(args.reps), "--subsample", "40", "--holdout", "50",
         "--threads", str(args.threads)])
    run(["report", "--dir", study])
    print(f"demo outputs in {args.out}")


if __name__ == "__main__":
    main()
