#!/usr/bin/env python3
"""Full-scale study: nine subjects, 600 s sessions, 30 protocol repetitions,
all four normalization schemes. Expect a long run; use --threads to spread
repetitions over workers and --reps to downscale for a trial pass.
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
    ap.add_argument("--out", default="out/study", help="output directory")
    ap.add_argument("--config", default="configs/demo_eeg_study.json")
    ap.add_argument("--reps", type=int, default=30)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    raw_dir = os.path.join(args.out, "raw")
    feats = os.path.join(args.out, "features.csv")
    study = os.path.join(args.out, "loso")

    run(["synth", "--config", args.config, "--out", raw_dir])
    run(["features", "--raw", raw_dir, "--out", feats])
    run(["loso", "--features", feats, "--out", study, "--all-schemes",
         "--reps", str(args.reps), "--threads", str(args.threads)])
    run(["report", "--dir", study])
    print(f"study outputs in {args.out}")


if __name__ == "__main__":
    main()
