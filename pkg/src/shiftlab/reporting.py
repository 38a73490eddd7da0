"""Writers and readers for the result bundle.

One evaluation run produces, per normalization scheme:

- ``report.json``     nested aggregates plus the resolved config;
- ``runs.csv``        long-format per-repetition values
                      (``repetition,scheme,metric,subject,value``);
- ``table1.csv``      mean +/- std summary, one row group per subject;
- ``disparity_avg.csv`` / ``marginal_avg.csv``  repetition-averaged matrices;
- ``per_subject_disparity.csv``  column means of the averaged disparity.

All files embed the resolved config as ``#`` comments (CSV) or a field
(JSON); readers skip comments. Numbers are written with round-trip float
formatting, so reruns with equal results produce equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import os
from collections import OrderedDict

import numpy as np

from .errors import ConfigurationError, MissingInputError
from .evaluate import ReportSet
from .normalize import SCHEME_KINDS
from .shift import per_subject_disparity
from .utils import format_float

RUNS_HEADER = ["repetition", "scheme", "metric", "subject", "value"]
GLOBAL_SUBJECT = "all"


def _mean_std(values: np.ndarray) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def fmt_mean_std(values: np.ndarray) -> str:
    s = _mean_std(values)
    return f"{s['mean']:.3f}±{s['std']:.3f}"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def write_matrix_csv(path: str, matrix: np.ndarray, subjects: list[int] | None = None,
                     config: dict | None = None) -> None:
    """Write a square matrix as a bare comma grid with comment headers."""
    matrix = np.asarray(matrix, dtype=np.float64)
    buf = io.StringIO()
    if config is not None:
        buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    if subjects is not None:
        buf.write("# subjects: " + ",".join(str(s) for s in subjects) + "\n")
    for row in matrix:
        buf.write(",".join(format_float(v) for v in row) + "\n")
    _write_text(path, buf.getvalue())


def read_matrix_csv(path: str) -> tuple[np.ndarray, list[int] | None]:
    """Read a matrix grid; returns (matrix, subjects-or-None)."""
    if not os.path.exists(path):
        raise MissingInputError(f"matrix file not found: {path}")
    subjects = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# subjects:"):
                    subjects = [int(v) for v in line.split(":", 1)[1].split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ConfigurationError(f"no matrix rows in {path}")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ConfigurationError(f"ragged matrix rows in {path}")
    return np.asarray(rows, dtype=np.float64), subjects


def runs_rows(rs: ReportSet) -> list[list[str]]:
    """Long-format rows for one report set, in a fixed deterministic order."""
    rows = []
    for rep in range(rs.n_reps):
        rows.append([str(rep), rs.scheme, "conditional_shift", GLOBAL_SUBJECT,
                     format_float(rs.conditional[rep])])
        rows.append([str(rep), rs.scheme, "marginal_shift", GLOBAL_SUBJECT,
                     format_float(rs.marginal[rep])])
        for si, sid in enumerate(rs.subjects):
            for metric, arr in (("train_acc", rs.train_acc), ("test_acc", rs.test_acc),
                                ("gap", rs.gap)):
                rows.append([str(rep), rs.scheme, metric, str(sid),
                             format_float(arr[rep, si])])
    return rows


def write_runs_csv(path: str, reportsets: list[ReportSet]) -> None:
    buf = io.StringIO()
    if reportsets:
        buf.write(f"# config: {json.dumps(reportsets[0].config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RUNS_HEADER)
    for rs in reportsets:
        writer.writerows(runs_rows(rs))
    _write_text(path, buf.getvalue())


def read_runs_csv(path: str) -> list[dict]:
    """Rows of a runs file as dicts with ``value`` parsed to float."""
    if not os.path.exists(path):
        raise MissingInputError(f"runs file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or rows[0] != RUNS_HEADER:
        raise ConfigurationError(f"unexpected runs header in {path}")
    return [
        {"repetition": int(r[0]), "scheme": r[1], "metric": r[2], "subject": r[3],
         "value": float(r[4])}
        for r in rows[1:]
    ]


def _scheme_order(schemes: list[str]) -> list[str]:
    known = [s for s in SCHEME_KINDS if s in schemes]
    extra = sorted(set(schemes) - set(known))
    return known + extra


def write_table_csv(path: str, reportsets: list[ReportSet]) -> None:
    """Summary table: one row group per subject, one column per scheme.

    Cells are ``mean±std`` over repetitions. The trailing row group carries
    the overall aggregates and the two shift magnitudes.
    """
    if not reportsets:
        raise ConfigurationError("no report sets to tabulate")
    subjects = reportsets[0].subjects
    for rs in reportsets:
        if rs.subjects != subjects:
            raise ConfigurationError("report sets cover different subjects")
    by_scheme = OrderedDict((rs.scheme, rs) for rs in reportsets)
    schemes = _scheme_order(list(by_scheme))

    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(reportsets[0].config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subject", "metric"] + schemes)
    metric_arrays = (("train", "train_acc"), ("test", "test_acc"), ("gap", "gap"))
    for si, sid in enumerate(subjects):
        for label, attr in metric_arrays:
            row = [f"S{sid}", label]
            row += [fmt_mean_std(getattr(by_scheme[s], attr)[:, si]) for s in schemes]
            writer.writerow(row)
    for label, attr in metric_arrays:
        row = ["All", label]
        row += [fmt_mean_std(getattr(by_scheme[s], attr).ravel()) for s in schemes]
        writer.writerow(row)
    writer.writerow(["Cond. shift", "shift"]
                    + [fmt_mean_std(by_scheme[s].conditional) for s in schemes])
    writer.writerow(["Marg. shift", "shift"]
                    + [fmt_mean_std(by_scheme[s].marginal) for s in schemes])
    _write_text(path, buf.getvalue())


def write_per_subject_disparity_csv(path: str, reportsets: list[ReportSet]) -> None:
    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(reportsets[0].config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subject", "scheme", "value"])
    for rs in reportsets:
        values = per_subject_disparity(rs.disparity_avg)
        for sid, v in zip(rs.subjects, values):
            writer.writerow([str(sid), rs.scheme, format_float(v)])
    _write_text(path, buf.getvalue())


def report_json_dict(rs: ReportSet) -> dict:
    per_subject = {}
    for si, sid in enumerate(rs.subjects):
        per_subject[str(sid)] = {
            "train_accuracy": _mean_std(rs.train_acc[:, si]),
            "test_accuracy": _mean_std(rs.test_acc[:, si]),
            "gap": _mean_std(rs.gap[:, si]),
        }
    psd = per_subject_disparity(rs.disparity_avg)
    return {
        "config": rs.config,
        "scheme": rs.scheme,
        "subjects": [int(s) for s in rs.subjects],
        "n_reps": rs.n_reps,
        "conditional_shift": {**_mean_std(rs.conditional),
                              "values": [float(v) for v in rs.conditional]},
        "marginal_shift": {**_mean_std(rs.marginal),
                           "values": [float(v) for v in rs.marginal]},
        "per_subject": per_subject,
        "overall": {
            "train_accuracy": _mean_std(rs.train_acc.ravel()),
            "test_accuracy": _mean_std(rs.test_acc.ravel()),
            "gap": _mean_std(rs.gap.ravel()),
        },
        "per_subject_disparity": {str(sid): float(v) for sid, v in zip(rs.subjects, psd)},
    }


def write_report_set(rs: ReportSet, out_dir: str) -> None:
    """Write the full per-scheme bundle into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report_json_dict(rs), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_runs_csv(os.path.join(out_dir, "runs.csv"), [rs])
    write_table_csv(os.path.join(out_dir, "table1.csv"), [rs])
    write_matrix_csv(os.path.join(out_dir, "disparity_avg.csv"), rs.disparity_avg,
                     rs.subjects, rs.config)
    write_matrix_csv(os.path.join(out_dir, "marginal_avg.csv"), rs.marginal_avg,
                     rs.subjects, rs.config)
    write_per_subject_disparity_csv(os.path.join(out_dir, "per_subject_disparity.csv"), [rs])


def consolidate_report(root_dir: str) -> tuple[str, str]:
    """Merge per-scheme subdirectories under ``root_dir``.

    Concatenates every ``<scheme>/runs.csv`` (subdirectories in sorted
    order) into ``runs_all.csv`` and writes ``summary.json`` with per-scheme
    aggregates. Returns the two output paths. Idempotent: reruns overwrite
    the same files with the same bytes.
    """
    if not os.path.isdir(root_dir):
        raise MissingInputError(f"report directory not found: {root_dir}")
    sub_dirs = sorted(
        d for d in os.listdir(root_dir)
        if os.path.isfile(os.path.join(root_dir, d, "runs.csv"))
    )
    if not sub_dirs:
        raise MissingInputError(f"no per-scheme runs.csv found under {root_dir}")

    all_rows: list[dict] = []
    summary: dict = {"schemes": {}}
    for d in sub_dirs:
        rows = read_runs_csv(os.path.join(root_dir, d, "runs.csv"))
        all_rows.extend(rows)
        report_path = os.path.join(root_dir, d, "report.json")
        scheme = rows[0]["scheme"] if rows else d
        entry: dict = {}
        if os.path.exists(report_path):
            with open(report_path, encoding="utf-8") as fh:
                rep = json.load(fh)
            entry = {
                "config": rep.get("config"),
                "conditional_shift": {k: rep["conditional_shift"][k] for k in ("mean", "std")},
                "marginal_shift": {k: rep["marginal_shift"][k] for k in ("mean", "std")},
                "overall": rep.get("overall"),
            }
        summary["schemes"][scheme] = entry

    runs_path = os.path.join(root_dir, "runs_all.csv")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RUNS_HEADER)
    for r in all_rows:
        writer.writerow([str(r["repetition"]), r["scheme"], r["metric"], r["subject"],
                         format_float(r["value"])])
    _write_text(runs_path, buf.getvalue())

    summary_path = os.path.join(root_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return runs_path, summary_path
