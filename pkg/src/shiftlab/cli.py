"""Command-line front end.

Five subcommands cover the full study loop:

- ``synth``     write synthetic data (multichannel recordings from an EEG
                recipe, or labeled feature domains with analytic truth from
                a scenario file);
- ``features``  turn raw recordings into a band-power feature table;
- ``shift``     one-shot disparity and separability matrices for a table;
- ``loso``      the repeated leave-one-subject-out protocol;
- ``report``    merge per-scheme outputs into one runs file and summary.

Every output embeds the resolved configuration and seed. Reruns with the
same inputs and seed write byte-identical files at any ``--threads`` value;
failures print a single ``error[<category>]: <message>`` line and exit
non-zero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .classify import ForestConfig, KnnConfig
from .config import ExperimentConfig, load_config_file, resolve_config
from .domains import (
    dataset_to_table,
    generate_domains,
    load_scenario,
    oracle_truth,
)
from .errors import ConfigurationError, MissingInputError, ShiftLabError
from .evaluate import repeat_experiment
from .features import read_features_csv, write_features_csv, concat_tables
from .normalize import SCHEME_KINDS, NormScheme, normalize_table
from .reporting import (
    consolidate_report,
    write_matrix_csv,
    write_report_set,
    write_runs_csv,
    write_table_csv,
    write_per_subject_disparity_csv,
)
from .shift import (
    conditional_shift,
    disparity_matrix,
    marginal_matrix,
    marginal_shift,
    table_to_dataset,
)
from .signal import (
    SyntheticEegConfig,
    band_power_features,
    bandpass_filter,
    downsample,
    epoch,
    generate_synthetic_eeg,
    load_recording,
    save_recording,
)


def _load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise MissingInputError(f"file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc


def _add_config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    """Attach the shared tuning flags; None defaults mean 'not given'."""
    flags = {
        "config": lambda: p.add_argument("--config", help="JSON config file"),
        "norm": lambda: p.add_argument("--norm", choices=SCHEME_KINDS,
                                       help="normalization scheme"),
        "norm-exponent": lambda: p.add_argument("--norm-exponent", type=int,
                                                dest="norm_exponent", choices=(1, 2),
                                                help="denominator exponent"),
        "k": lambda: p.add_argument("--k", type=int, help="neighbour count"),
        "trees-subject": lambda: p.add_argument("--trees-subject", type=int,
                                                dest="trees_subject",
                                                help="trees for pairwise subject forests"),
        "trees-workload": lambda: p.add_argument("--trees-workload", type=int,
                                                 dest="trees_workload",
                                                 help="trees for the workload classifier"),
        "folds": lambda: p.add_argument("--folds", type=int, help="CV folds"),
        "reps": lambda: p.add_argument("--reps", type=int, dest="n_reps",
                                       help="protocol repetitions"),
        "subsample": lambda: p.add_argument("--subsample", type=int,
                                            help="task rows kept per subject and condition"),
        "holdout": lambda: p.add_argument("--holdout", type=int, dest="holdout_per_subject",
                                          help="held-out rows per training subject"),
        "seed": lambda: p.add_argument("--seed", type=int, help="master seed"),
        "bands": lambda: p.add_argument("--bands", help="bands as name:lo:hi,name:lo:hi,..."),
        "threads": lambda: p.add_argument("--threads", type=int, help="worker threads"),
        "h-diagonal": lambda: p.add_argument("--h-diagonal", type=float, dest="h_diagonal",
                                             help="fixed diagonal of the separability matrix"),
    }
    for name in names:
        flags[name]()


def _flag_values(args: argparse.Namespace) -> dict:
    keys = ("norm", "norm_exponent", "k", "trees_subject", "trees_workload", "folds",
            "n_reps", "subsample", "holdout_per_subject", "seed", "bands", "threads",
            "h_diagonal", "target_hz", "bp_low_hz", "bp_high_hz", "epoch_len_s",
            "overlap_s")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else None
    return resolve_config(file_values, _flag_values(args))


def cmd_synth(args: argparse.Namespace) -> int:
    raw = _load_json(args.config_file)
    os.makedirs(args.out, exist_ok=True)
    if "domains" in raw:
        return _synth_scenario(args, raw)
    if "subjects" in raw:
        return _synth_eeg(args, raw)
    raise ConfigurationError(
        "synthesis config must declare either 'domains' (feature scenario) "
        "or 'subjects' (recording recipe)"
    )


def _synth_scenario(args: argparse.Namespace, raw: dict) -> int:
    specs, file_seed = load_scenario(args.config_file)
    seed = args.seed if args.seed is not None else file_seed
    dataset = generate_domains(specs, master_seed=seed)
    table = dataset_to_table(dataset)
    truth = oracle_truth(specs, n_mc=int(raw.get("n_mc", 100_000)), seed=seed)
    echo = {"seed": seed, "scenario": os.path.basename(args.config_file),
            "n_domains": len(specs)}
    features_path = os.path.join(args.out, "features.csv")
    write_features_csv(table, features_path, comments=[f"config: {json.dumps(echo, sort_keys=True)}"])
    truth_path = os.path.join(args.out, "truth.json")
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump({"config": echo, **truth.to_json_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {features_path} and {truth_path}")
    return 0


def _synth_eeg(args: argparse.Namespace, raw: dict) -> int:
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    defaults = {
        "rate_hz": float(raw.get("rate_hz", 500.0)),
        "noise_level": float(raw.get("noise_level", 0.1)),
        "task_s": float(raw.get("task_s", 600.0)),
        "baseline1_s": float(raw.get("baseline1_s", 60.0)),
        "baseline2_s": float(raw.get("baseline2_s", 60.0)),
    }
    base_amps = raw.get("band_amplitudes", {"delta": 1.0, "theta": 0.8,
                                            "alpha": 1.2, "beta": 0.6})
    written = []
    for sub in raw["subjects"]:
        sid = int(sub["id"])
        scale = float(sub.get("amplitude_scale", 1.0))
        if scale <= 0:
            raise ConfigurationError(f"subject {sid}: amplitude_scale must be positive")
        for sess in sub.get("sessions", [{"condition": None}]):
            cond = sess.get("condition")
            amps = dict(sess.get("band_amplitudes", base_amps))
            amps = {k: float(v) * scale for k, v in amps.items()}
            cfg = SyntheticEegConfig(
                subject_id=sid,
                condition=cond,
                band_amplitudes=amps,
                baseline1_amplitudes={k: float(v) * scale for k, v in
                                      sess["baseline1_amplitudes"].items()}
                if "baseline1_amplitudes" in sess else None,
                baseline2_amplitudes={k: float(v) * scale for k, v in
                                      sess["baseline2_amplitudes"].items()}
                if "baseline2_amplitudes" in sess else None,
                seed=seed,
                **defaults,
            )
            rec = generate_synthetic_eeg(cfg)
            tag = cond if cond is not None else "na"
            base = os.path.join(args.out, f"rec_s{sid}_{tag}")
            save_recording(rec, base)
            written.append(base)
    print(f"wrote {len(written)} recording(s) to {args.out}")
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if not os.path.isdir(args.raw):
        raise MissingInputError(f"recording directory not found: {args.raw}")
    headers = sorted(
        os.path.join(args.raw, f) for f in os.listdir(args.raw)
        if f.endswith(".json")
    )
    if not headers:
        raise MissingInputError(f"no recording headers (*.json) in {args.raw}")
    tables = []
    for path in headers:
        rec = load_recording(path)
        rec = downsample(rec, cfg.target_hz)
        rec = bandpass_filter(rec, cfg.bp_low_hz, cfg.bp_high_hz)
        epochs = epoch(rec, cfg.epoch_len_s, cfg.overlap_s)
        tables.append(band_power_features(epochs, cfg.bands))
    table = concat_tables(tables)
    write_features_csv(table, args.out, comments=[f"config: {cfg.echo_json()}"])
    print(f"wrote {table.n_rows} rows x {table.dim} features to {args.out}")
    return 0


def cmd_shift(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    table = read_features_csv(args.features)
    scheme = NormScheme(cfg.norm, cfg.norm_exponent)
    normalized = normalize_table(table, scheme)
    dataset = table_to_dataset(normalized)
    echo = cfg.echo_dict()
    d = disparity_matrix(dataset, KnnConfig(cfg.k), seed=cfg.seed, threads=cfg.threads)
    h = marginal_matrix(dataset, ForestConfig(cfg.trees_subject), seed=cfg.seed,
                        folds=cfg.folds, diagonal=cfg.h_diagonal,
                        store_error_rate=args.error_rate, threads=cfg.threads)
    cond = conditional_shift(d, config=echo)
    marg = marginal_shift(h, config=echo)
    os.makedirs(args.out, exist_ok=True)
    write_matrix_csv(os.path.join(args.out, "disparity.csv"), d, dataset.domain_ids, echo)
    write_matrix_csv(os.path.join(args.out, "marginal.csv"), h, dataset.domain_ids, echo)
    with open(os.path.join(args.out, "estimates.json"), "w", encoding="utf-8") as fh:
        json.dump({
            "config": echo,
            "subjects": [int(s) for s in dataset.domain_ids],
            "conditional": cond.to_json_dict(),
            "marginal": marg.to_json_dict(),
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"conditional shift {cond.value:.3f}, marginal shift {marg.value:.3f} "
          f"({dataset.n_domains} domains)")
    return 0


def cmd_loso(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    table = read_features_csv(args.features)
    schemes = list(SCHEME_KINDS) if args.all_schemes else [cfg.norm]
    reportsets = []
    for scheme in schemes:
        scheme_cfg = replace(cfg, norm=scheme)
        rs = repeat_experiment(table, scheme_cfg)
        write_report_set(rs, os.path.join(args.out, scheme))
        reportsets.append(rs)
    if args.all_schemes:
        write_table_csv(os.path.join(args.out, "table1.csv"), reportsets)
        write_runs_csv(os.path.join(args.out, "runs.csv"), reportsets)
        write_per_subject_disparity_csv(
            os.path.join(args.out, "per_subject_disparity.csv"), reportsets)
    for rs in reportsets:
        print(f"{rs.scheme}: conditional {rs.conditional.mean():.3f}, "
              f"marginal {rs.marginal.mean():.3f}, gap {rs.gap.mean():.3f}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    runs_path, summary_path = consolidate_report(args.dir)
    print(f"wrote {runs_path} and {summary_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="Quantify conditional and marginal shift across labeled data domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic recordings or feature domains")
    p.add_argument("--config", dest="config_file", required=True,
                   help="scenario or recording-recipe JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the file's seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="extract band-power features from recordings")
    p.add_argument("--raw", required=True, help="directory of recording headers")
    p.add_argument("--out", required=True, help="output feature CSV")
    _add_config_flags(p, "config", "bands", "seed")
    p.add_argument("--target-hz", type=float, dest="target_hz", help="working sample rate")
    p.add_argument("--bp-low", type=float, dest="bp_low_hz", help="band-pass low edge")
    p.add_argument("--bp-high", type=float, dest="bp_high_hz", help="band-pass high edge")
    p.add_argument("--epoch-len", type=float, dest="epoch_len_s", help="epoch length, s")
    p.add_argument("--overlap", type=float, dest="overlap_s", help="epoch overlap, s")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("shift", help="disparity and separability matrices for a table")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--error-rate", action="store_true",
                   help="store error rates instead of accuracies off-diagonal")
    _add_config_flags(p, "config", "norm", "norm-exponent", "k", "trees-subject",
                      "folds", "seed", "threads", "h-diagonal")
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("loso", help="repeated leave-one-subject-out evaluation")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--all-schemes", action="store_true",
                   help="run every normalization scheme and write a combined table")
    _add_config_flags(p, "config", "norm", "norm-exponent", "k", "trees-subject",
                      "trees-workload", "folds", "reps", "subsample", "holdout",
                      "seed", "threads", "h-diagonal")
    p.set_defaults(func=cmd_loso)

    p = sub.add_parser("report", help="merge per-scheme outputs")
    p.add_argument("--dir", required=True, help="directory holding per-scheme subdirectories")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ShiftLabError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
