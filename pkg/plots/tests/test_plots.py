"""Tests for the figure scripts: rendering, input validation, determinism."""

import subprocess
import sys
from pathlib import Path

import pytest

from shiftplots import (
    PlotInputError,
    plot_boxplots,
    plot_matrix_heatmap,
    plot_subject_bars,
    read_matrix,
    read_runs,
)

SAMPLE = Path(__file__).resolve().parent.parent / "sample"
SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def write_runs(path, rows):
    lines = ["repetition,scheme,metric,subject,value"]
    lines += [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def runs_csv(tmp_path):
    rows = []
    for rep in range(3):
        for scheme, base in (("none", 0.6), ("whitening", 0.3)):
            rows.append([rep, scheme, "conditional_shift", "all", base + 0.01 * rep])
            rows.append([rep, scheme, "marginal_shift", "all", base + 0.05])
            for sid in (0, 1):
                rows.append([rep, scheme, "gap", sid, 0.1 * (sid + 1) + 0.01 * rep])
    path = tmp_path / "runs.csv"
    write_runs(path, rows)
    return str(path)


@pytest.fixture
def matrix_csv(tmp_path):
    path = tmp_path / "matrix.csv"
    path.write_text("# subjects: 0,1,2\n0.0,0.2,0.4\n0.2,0.0,0.6\n0.4,0.6,0.0\n")
    return str(path)


@pytest.fixture
def bars_csv(tmp_path):
    path = tmp_path / "bars.csv"
    path.write_text("subject,scheme,value\n0,none,0.4\n1,none,0.6\n"
                    "0,whitening,0.1\n1,whitening,0.2\n")
    return str(path)


class TestBoxplots:
    def test_global_metric_renders_scheme_boxes(self, runs_csv, tmp_path):
        out = str(tmp_path / "fig.svg")
        assert plot_boxplots(runs_csv, "conditional_shift", out) == out
        text = Path(out).read_text()
        assert text.startswith("<?xml")
        assert "none" in text and "whitening" in text

    def test_subject_metric_renders_subject_groups(self, runs_csv, tmp_path):
        out = str(tmp_path / "fig.svg")
        plot_boxplots(runs_csv, "gap", out)
        text = Path(out).read_text()
        assert "S0" in text and "S1" in text

    def test_single_rep_degenerate_box(self, tmp_path):
        path = tmp_path / "one.csv"
        write_runs(path, [[0, "none", "conditional_shift", "all", 0.5]])
        out = str(tmp_path / "fig.svg")
        plot_boxplots(str(path), "conditional_shift", out)
        assert Path(out).exists()

    def test_unknown_metric(self, runs_csv, tmp_path):
        with pytest.raises(PlotInputError, match="unknown metric"):
            plot_boxplots(runs_csv, "accuracy_gap", str(tmp_path / "f.svg"))

    def test_metric_not_in_file(self, tmp_path):
        path = tmp_path / "one.csv"
        write_runs(path, [[0, "none", "conditional_shift", "all", 0.5]])
        with pytest.raises(PlotInputError, match="no rows"):
            plot_boxplots(str(path), "gap", str(tmp_path / "f.svg"))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_runs(path, [])
        with pytest.raises(PlotInputError, match="no data rows"):
            plot_boxplots(str(path), "gap", str(tmp_path / "f.svg"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(PlotInputError, match="not found"):
            plot_boxplots(str(tmp_path / "nope.csv"), "gap", str(tmp_path / "f.svg"))

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("rep,scheme,metric,subject,value\n0,none,gap,0,0.1\n")
        with pytest.raises(PlotInputError, match="expected header"):
            plot_boxplots(str(path), "gap", str(tmp_path / "f.svg"))


class TestHeatmap:
    def test_renders(self, matrix_csv, tmp_path):
        out = str(tmp_path / "fig.svg")
        assert plot_matrix_heatmap(matrix_csv, out) == out
        assert Path(out).read_text().startswith("<?xml")

    def test_zero_matrix(self, tmp_path):
        path = tmp_path / "zero.csv"
        path.write_text("0.0,0.0\n0.0,0.0\n")
        plot_matrix_heatmap(str(path), str(tmp_path / "fig.svg"))
        assert (tmp_path / "fig.svg").exists()

    def test_non_square(self, tmp_path):
        path = tmp_path / "rect.csv"
        path.write_text("0.0,0.1,0.2\n0.1,0.0,0.3\n")
        with pytest.raises(PlotInputError, match="not square"):
            plot_matrix_heatmap(str(path), str(tmp_path / "fig.svg"))

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("0.0,oops\n0.1,0.0\n")
        with pytest.raises(PlotInputError, match="non-numeric"):
            plot_matrix_heatmap(str(path), str(tmp_path / "fig.svg"))

    def test_reader_returns_labels(self, matrix_csv):
        matrix, subjects = read_matrix(matrix_csv)
        assert matrix.shape == (3, 3)
        assert subjects == ["0", "1", "2"]


class TestSubjectBars:
    def test_renders(self, bars_csv, tmp_path):
        out = str(tmp_path / "fig.svg")
        assert plot_subject_bars(bars_csv, out) == out
        text = Path(out).read_text()
        assert "S0" in text and "whitening" in text

    def test_missing_scheme_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("subject,value\n0,0.4\n")
        with pytest.raises(PlotInputError, match="scheme column"):
            plot_subject_bars(str(path), str(tmp_path / "fig.svg"))

    def test_out_of_range_warns(self, tmp_path):
        path = tmp_path / "hot.csv"
        path.write_text("subject,scheme,value\n0,none,1.4\n1,none,0.2\n")
        with pytest.warns(UserWarning, match="outside"):
            plot_subject_bars(str(path), str(tmp_path / "fig.svg"))
        assert (tmp_path / "fig.svg").exists()


class TestDeterminismAndSample:
    def test_sample_bundle_renders_all_five_figures(self, tmp_path):
        jobs = [
            ("cond.svg", lambda o: plot_boxplots(str(SAMPLE / "runs.csv"),
                                                 "conditional_shift", o)),
            ("marg.svg", lambda o: plot_boxplots(str(SAMPLE / "runs.csv"),
                                                 "marginal_shift", o)),
            ("gap.svg", lambda o: plot_boxplots(str(SAMPLE / "runs.csv"), "gap", o)),
            ("heat.svg", lambda o: plot_matrix_heatmap(
                str(SAMPLE / "disparity_avg.csv"), o)),
            ("bars.svg", lambda o: plot_subject_bars(
                str(SAMPLE / "per_subject_disparity.csv"), o)),
        ]
        for name, render in jobs:
            first = tmp_path / f"a_{name}"
            second = tmp_path / f"b_{name}"
            render(str(first))
            render(str(second))
            assert first.read_bytes() == second.read_bytes(), name
            assert first.read_text().startswith("<?xml")

    def test_sample_runs_cover_all_schemes(self):
        runs = read_runs(str(SAMPLE / "runs.csv"))
        assert runs.schemes() == ["none", "whitening", "baseline1", "baseline2"]
        assert {"conditional_shift", "marginal_shift", "gap"} <= runs.metrics()

    def test_inputs_untouched(self, tmp_path):
        before = (SAMPLE / "runs.csv").read_bytes()
        plot_boxplots(str(SAMPLE / "runs.csv"), "gap", str(tmp_path / "f.svg"))
        assert (SAMPLE / "runs.csv").read_bytes() == before


class TestScripts:
    def run_script(self, name, argv):
        return subprocess.run(
            [sys.executable, str(SCRIPTS / name)] + argv,
            capture_output=True, text=True)

    def test_boxplot_script(self, tmp_path):
        out = tmp_path / "fig.svg"
        proc = self.run_script("plot_boxplots.py",
                               ["--in", str(SAMPLE / "runs.csv"),
                                "--metric", "marginal_shift", "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_heatmap_script(self, tmp_path):
        out = tmp_path / "fig.svg"
        proc = self.run_script("plot_matrix_heatmap.py",
                               ["--in", str(SAMPLE / "marginal_avg.csv"),
                                "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_bars_script(self, tmp_path):
        out = tmp_path / "fig.svg"
        proc = self.run_script("plot_subject_bars.py",
                               ["--in", str(SAMPLE / "per_subject_disparity.csv"),
                                "--out", str(out)])
        assert proc.returncode == 0, proc.stderr
        assert out.exists()

    def test_script_error_exit(self, tmp_path):
        proc = self.run_script("plot_boxplots.py",
                               ["--in", str(SAMPLE / "runs.csv"),
                                "--metric", "nope", "--out",
                                str(tmp_path / "f.svg")])
        assert proc.returncode == 2
        assert proc.stderr.startswith("error:")
