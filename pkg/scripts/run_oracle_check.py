#!/usr/bin/env python3
"""Estimate conditional and marginal shift on a synthetic scenario whose
ground truth has a closed form, then print estimate vs truth side by side.
"""

import argparse
import json
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
    ap.add_argument("--out", default="out/oracle", help="output directory")
    ap.add_argument("--config", default="configs/scenario_oracle.json")
    ap.add_argument("--seed", type=int, default=10)
    args = ap.parse_args()

    synth_dir = os.path.join(args.out, "synth")
    est_dir = os.path.join(args.out, "estimates")
    run(["synth", "--config", args.config, "--out", synth_dir,
         "--seed", str(args.seed)])
    run(["shift", "--features", os.path.join(synth_dir, "features.csv"),
         "--out", est_dir, "--seed", str(args.seed)])

    with open(os.path.join(synth_dir, "truth.json")) as fh:
        truth = json.load(fh)
    with open(os.path.join(est_dir, "estimates.json")) as fh:
        est = json.load(fh)

    for kind, truth_key in (("conditional", "conditional_shift_truth"),
                            ("marginal", "marginal_shift_truth")):
        e = est[kind]["value"]
        t = truth[truth_key]
        print(f"{kind:<12} estimate {e:.4f}   truth {t:.4f}   delta {e - t:+.4f}")


if __name__ == "__main__":
    main()
