"""End-to-end command-line tests, run in-process through ``cli.main``."""

import json
import os

import numpy as np
import pytest

from shiftlab import cli
from shiftlab.domains import dataset_to_table
from shiftlab.features import FeatureTable, read_features_csv, write_features_csv


def run(argv):
    return cli.main(argv)


def scenario_file(tmp_path, flips=(0.0, 0.0, 0.2), n=60, master_seed=3):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "master_seed": master_seed,
        "n_mc": 5000,
        "domains": [
            {"mean": [0.0, 0.0], "normal": [1.0, 0.0], "flip_rate": f, "n": n}
            for f in flips
        ],
    }))
    return str(path)


def eeg_file(tmp_path, n_subjects=3):
    path = tmp_path / "eeg.json"
    subjects = []
    for sid in range(n_subjects):
        subjects.append({
            "id": sid,
            "amplitude_scale": 1.0 + 0.3 * sid,
            "sessions": [
                {"condition": "low",
                 "band_amplitudes": {"delta": 1.0, "theta": 0.8, "alpha": 1.4, "beta": 0.5}},
                {"condition": "high",
                 "band_amplitudes": {"delta": 1.0, "theta": 1.3, "alpha": 0.7, "beta": 0.9}},
            ],
        })
    path.write_text(json.dumps({
        "seed": 21,
        "rate_hz": 500.0,
        "task_s": 20.0,
        "baseline1_s": 6.0,
        "baseline2_s": 6.0,
        "noise_level": 0.05,
        "subjects": subjects,
    }))
    return str(path)


def duplicated_domain_csv(tmp_path):
    rng = np.random.default_rng(9)
    x = rng.normal(size=(80, 3))
    y = (x[:, 0] > 0).astype(int)
    conds = np.array(["low" if v == 0 else "high" for v in y], dtype=object)
    table = FeatureTable(
        np.concatenate([np.zeros(80, dtype=int), np.ones(80, dtype=int)]),
        np.concatenate([conds, conds]),
        np.array(["task"] * 160, dtype=object),
        np.vstack([x, x]),
    )
    path = str(tmp_path / "dup.csv")
    write_features_csv(table, path)
    return path


def same_distribution_csv(tmp_path):
    """Two subjects drawn independently from one distribution."""
    rng = np.random.default_rng(11)
    x = rng.normal(size=(160, 3))
    y = (x[:, 0] > 0).astype(int)
    conds = np.array(["low" if v == 0 else "high" for v in y], dtype=object)
    table = FeatureTable(
        np.concatenate([np.zeros(80, dtype=int), np.ones(80, dtype=int)]),
        conds,
        np.array(["task"] * 160, dtype=object),
        x,
    )
    path = str(tmp_path / "same.csv")
    write_features_csv(table, path)
    return path


class TestSynth:
    def test_scenario_outputs(self, tmp_path, capsys):
        cfg = scenario_file(tmp_path)
        out = tmp_path / "out"
        assert run(["synth", "--config", cfg, "--out", str(out)]) == 0
        table = read_features_csv(str(out / "features.csv"))
        assert table.n_rows == 180 and table.dim == 2
        truth = json.loads((out / "truth.json").read_text())
        assert len(truth["disagreement"]) == 3
        assert truth["disagreement"][0][1] == 0.0  # identical clean domains
        assert truth["disagreement"][0][2] == pytest.approx(0.2, abs=0.01)

    def test_scenario_rerun_identical_bytes(self, tmp_path):
        cfg = scenario_file(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        run(["synth", "--config", cfg, "--out", str(a)])
        run(["synth", "--config", cfg, "--out", str(b)])
        for name in ("features.csv", "truth.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_eeg_outputs(self, tmp_path):
        cfg = eeg_file(tmp_path, n_subjects=2)
        out = tmp_path / "raw"
        assert run(["synth", "--config", cfg, "--out", str(out)]) == 0
        headers = sorted(p.name for p in out.glob("*.json"))
        assert headers == ["rec_s0_high.json", "rec_s0_low.json",
                           "rec_s1_high.json", "rec_s1_low.json"]
        assert len(list(out.glob("*.f32"))) == 4

    def test_unknown_layout_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert run(["synth", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert capsys.readouterr().err.startswith("error[config]")


class TestFeatures:
    def test_pipeline(self, tmp_path):
        cfg = eeg_file(tmp_path, n_subjects=2)
        raw = tmp_path / "raw"
        run(["synth", "--config", cfg, "--out", str(raw)])
        out_csv = str(tmp_path / "features.csv")
        assert run(["features", "--raw", str(raw), "--out", out_csv]) == 0
        with open(out_csv) as fh:
            first = fh.readline()
            header = fh.readline().strip()
        assert first.startswith("# config:")
        assert header == "subject,condition,segment," + ",".join(f"f{i}" for i in range(16))
        table = read_features_csv(out_csv)
        # per session: task 17 epochs, baselines 3 + 3 at 4 s / 3 s windows
        assert table.n_rows == 2 * 2 * (17 + 3 + 3)
        assert np.all(table.features >= 0.0)
        assert set(table.segments) == {"task", "baseline1", "baseline2"}

    def test_missing_dir(self, tmp_path, capsys):
        code = run(["features", "--raw", str(tmp_path / "nope"), "--out",
                    str(tmp_path / "f.csv")])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("error[missing-input]") and err.count("\n") == 1


class TestShift:
    def test_duplicated_domains(self, tmp_path):
        feats = duplicated_domain_csv(tmp_path)
        out = tmp_path / "shift"
        assert run(["shift", "--features", feats, "--out", str(out), "--seed", "5"]) == 0
        est = json.loads((out / "estimates.json").read_text())
        d = np.asarray(est["conditional"]["matrix"])
        assert d[0, 1] == 0.0  # exact duplicates: 1-NN agrees everywhere
        assert est["config"]["seed"] == 5
        assert (out / "disparity.csv").exists() and (out / "marginal.csv").exists()

    def test_same_distribution_marginal_near_chance(self, tmp_path):
        feats = same_distribution_csv(tmp_path)
        out = tmp_path / "shift"
        assert run(["shift", "--features", feats, "--out", str(out), "--seed", "5"]) == 0
        est = json.loads((out / "estimates.json").read_text())
        h = np.asarray(est["marginal"]["matrix"])
        assert 0.4 <= h[0, 1] <= 0.6
        assert h[0, 0] == 0.5 and h[1, 1] == 0.5

    def test_error_rate_flag(self, tmp_path):
        feats = duplicated_domain_csv(tmp_path)
        out_a, out_e = tmp_path / "acc", tmp_path / "err"
        run(["shift", "--features", feats, "--out", str(out_a), "--seed", "5"])
        run(["shift", "--features", feats, "--out", str(out_e), "--seed", "5",
             "--error-rate"])
        a = json.loads((out_a / "estimates.json").read_text())
        e = json.loads((out_e / "estimates.json").read_text())
        ha = np.asarray(a["marginal"]["matrix"])
        he = np.asarray(e["marginal"]["matrix"])
        assert he[0, 1] == pytest.approx(1.0 - ha[0, 1], abs=1e-12)

    def test_missing_features(self, tmp_path, capsys):
        assert run(["shift", "--features", str(tmp_path / "no.csv"),
                    "--out", str(tmp_path / "o")]) == 2
        assert capsys.readouterr().err.startswith("error[missing-input]")


class TestLoso:
    def scenario_features(self, tmp_path, n=120):
        cfg = scenario_file(tmp_path, flips=(0.0, 0.0, 0.1), n=n)
        out = tmp_path / "synth"
        run(["synth", "--config", cfg, "--out", str(out)])
        return str(out / "features.csv")

    def test_single_scheme_bundle(self, tmp_path):
        feats = self.scenario_features(tmp_path)
        out = tmp_path / "loso"
        assert run(["loso", "--features", feats, "--out", str(out), "--norm", "none",
                    "--reps", "2", "--subsample", "30", "--holdout", "20",
                    "--trees-subject", "5", "--trees-workload", "5"]) == 0
        bundle = out / "none"
        for name in ("report.json", "runs.csv", "table1.csv", "disparity_avg.csv",
                     "marginal_avg.csv", "per_subject_disparity.csv"):
            assert (bundle / name).exists(), name
        rep = json.loads((bundle / "report.json").read_text())
        assert rep["n_reps"] == 2
        assert rep["config"]["subsample"] == 30

    def test_all_schemes_combined_table(self, tmp_path):
        cfg = eeg_file(tmp_path, n_subjects=3)
        raw = tmp_path / "raw"
        run(["synth", "--config", cfg, "--out", str(raw)])
        feats = str(tmp_path / "features.csv")
        run(["features", "--raw", str(raw), "--out", feats])
        out = tmp_path / "study"
        assert run(["loso", "--features", feats, "--out", str(out), "--all-schemes",
                    "--reps", "1", "--subsample", "10", "--holdout", "10",
                    "--trees-subject", "5", "--trees-workload", "5"]) == 0
        header = [l for l in (out / "table1.csv").read_text().splitlines()
                  if not l.startswith("#")][0]
        assert header == "subject,metric,none,whitening,baseline1,baseline2"
        for scheme in ("none", "whitening", "baseline1", "baseline2"):
            assert (out / scheme / "report.json").exists()
        assert (out / "runs.csv").exists()
        assert (out / "per_subject_disparity.csv").exists()

    def test_rerun_identical_bytes(self, tmp_path):
        feats = self.scenario_features(tmp_path)
        args = ["--norm", "none", "--reps", "2", "--subsample", "30",
                "--holdout", "20", "--trees-subject", "5", "--trees-workload", "5"]
        a, b = tmp_path / "a", tmp_path / "b"
        run(["loso", "--features", feats, "--out", str(a)] + args)
        run(["loso", "--features", feats, "--out", str(b)] + args)
        for name in ("report.json", "runs.csv", "table1.csv", "disparity_avg.csv"):
            assert (a / "none" / name).read_bytes() == (b / "none" / name).read_bytes()

    def test_missing_baseline_error(self, tmp_path, capsys):
        feats = self.scenario_features(tmp_path)  # scenario tables have no baselines
        code = run(["loso", "--features", feats, "--out", str(tmp_path / "x"),
                    "--norm", "baseline1", "--reps", "1", "--subsample", "30",
                    "--holdout", "20"])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("error[missing-baseline]")


class TestReport:
    def test_consolidates_schemes(self, tmp_path):
        cfg = scenario_file(tmp_path, n=100)
        synth_dir = tmp_path / "synth"
        run(["synth", "--config", cfg, "--out", str(synth_dir)])
        feats = str(synth_dir / "features.csv")
        out = tmp_path / "study"
        for scheme in ("none", "whitening"):
            run(["loso", "--features", feats, "--out", str(out), "--norm", scheme,
                 "--reps", "1", "--subsample", "30", "--holdout", "20",
                 "--trees-subject", "5", "--trees-workload", "5"])
        assert run(["report", "--dir", str(out)]) == 0
        from shiftlab.reporting import read_runs_csv
        rows = read_runs_csv(str(out / "runs_all.csv"))
        assert {r["scheme"] for r in rows} == {"none", "whitening"}
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["schemes"]) == {"none", "whitening"}

    def test_missing_dir(self, tmp_path, capsys):
        assert run(["report", "--dir", str(tmp_path / "none")]) == 2
        assert capsys.readouterr().err.startswith("error[missing-input]")


class TestConfigPrecedence:
    def test_flags_beat_config_file(self, tmp_path):
        feats = duplicated_domain_csv(tmp_path)
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"seed": 3, "trees_subject": 5}))
        out = tmp_path / "o"
        run(["shift", "--features", feats, "--out", str(out), "--config", str(cfg),
             "--seed", "4"])
        est = json.loads((out / "estimates.json").read_text())
        assert est["config"]["seed"] == 4          # flag wins
        assert est["config"]["trees_subject"] == 5  # file beats default

    def test_env_seed_is_default_only(self, tmp_path, monkeypatch):
        feats = duplicated_domain_csv(tmp_path)
        monkeypatch.setenv("SHIFTLAB_SEED", "77")
        out = tmp_path / "env"
        run(["shift", "--features", feats, "--out", str(out)])
        est = json.loads((out / "estimates.json").read_text())
        assert est["config"]["seed"] == 77
        out2 = tmp_path / "flag"
        run(["shift", "--features", feats, "--out", str(out2), "--seed", "2"])
        est2 = json.loads((out2 / "estimates.json").read_text())
        assert est2["config"]["seed"] == 2

    def test_unknown_config_key(self, tmp_path, capsys):
        feats = duplicated_domain_csv(tmp_path)
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"tees_subject": 5}))
        assert run(["shift", "--features", feats, "--out", str(tmp_path / "o"),
                    "--config", str(cfg)]) == 2
        assert capsys.readouterr().err.startswith("error[config]")

    def test_default_seed_without_env(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SHIFTLAB_SEED", raising=False)
        feats = duplicated_domain_csv(tmp_path)
        out = tmp_path / "o"
        run(["shift", "--features", feats, "--out", str(out)])
        est = json.loads((out / "estimates.json").read_text())
        assert est["config"]["seed"] == 10
