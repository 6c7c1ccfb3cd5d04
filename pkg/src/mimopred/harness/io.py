"""Flat-file serialization of result tables: CSV, JSON and per-figure extracts."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..utils import db, format_float
from .experiment import ResultTable, Row
from .metrics import empirical_cdf

HEADER = ("model", "snr_db", "horizon_lambda", "metric", "value", "n_trials", "seed")
SAMPLE_HEADER = ("model", "snr_db", "horizon_lambda", "trial", "nse")

# metrics that get a companion "<name>_db" row on output
_DB_METRICS = ("nmse", "median_nse")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format_float(float(v))


def serial_rows(table: ResultTable) -> list:
    """Rows as written, with dB companions appended after their linear rows."""
    out = []
    for row in table.rows:
        out.append(row)
        if row.metric in _DB_METRICS:
            value = db(row.value) if row.value > 0 else -math.inf
            out.append(Row(row.model, row.snr_db, row.horizon_lambda, row.metric + "_db",
                           float(value), row.n_trials, row.seed))
    return out


def table_to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in serial_rows(table):
        w.writerow([r.model, _fmt(r.snr_db), _fmt(r.horizon_lambda), r.metric,
                    _fmt(r.value), _fmt(r.n_trials), _fmt(r.seed)])
    return buf.getvalue()


def samples_to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_HEADER)
    for model, snr, h, trial, v in table.nse_samples:
        w.writerow([model, _fmt(snr), _fmt(h), str(trial), _fmt(v)])
    return buf.getvalue()


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    if math.isfinite(v):
        return float(format_float(v))
    return format_float(v)  # JSON has no inf/nan literal


def table_to_json(table: ResultTable, extra: dict | None = None) -> str:
    doc = {
        "degraded": table.degraded,
        "rows": [
            {k: (_json_float(getattr(r, k)) if k in ("snr_db", "horizon_lambda", "value")
                 else getattr(r, k)) for k in HEADER}
            for r in serial_rows(table)
        ],
    }
    if extra:
        doc["run"] = extra
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_csv(path) -> ResultTable:
    """Inverse of :func:`table_to_csv`; ``*_db`` companion rows are dropped."""
    table = ResultTable()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            if rec["metric"].endswith("_db") and rec["metric"][:-3] in _DB_METRICS:
                continue
            h = rec["horizon_lambda"]
            table.add(Row(rec["model"], float(rec["snr_db"]), float(h) if h else None,
                          rec["metric"], float(rec["value"]), int(rec["n_trials"]),
                          int(rec["seed"])))
    return table


def read_samples_csv(path, table: ResultTable) -> ResultTable:
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            table.nse_samples.append((rec["model"], float(rec["snr_db"]),
                                      float(rec["horizon_lambda"]), int(rec["trial"]),
                                      float(rec["nse"])))
    return table


def write_results(table: ResultTable, out_dir, extra: dict | None = None) -> dict:
    """Write ``results.csv``, ``results.json`` and ``nse_samples.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / "results.csv",
        "json": out / "results.json",
        "samples": out / "nse_samples.csv",
    }
    paths["csv"].write_text(table_to_csv(table))
    paths["json"].write_text(table_to_json(table, extra))
    paths["samples"].write_text(samples_to_csv(table))
    return paths


def _write(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_report(table: ResultTable, out_dir) -> list:
    """Plot-ready CSVs, one per figure family.

    * ``nmse_vs_snr.csv``: model, horizon, SNR and NMSE in dB (bound rows included).
    * ``nmse_vs_horizon.csv``: the same data keyed by horizon first.
    * ``rmse_vs_snr.csv``: parameter RMSE and square-root CRB.
    * ``nse_cdf.csv``: empirical CDF of per-trial NSE in dB.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    nmse = [r for r in table.rows if r.metric == "nmse"]
    rows = [[r.model, _fmt(r.snr_db), _fmt(r.horizon_lambda), _fmt(db(r.value))]
            for r in nmse]
    path = out / "nmse_vs_snr.csv"
    _write(path, ("model", "snr_db", "horizon_lambda", "nmse_db"),
           sorted(rows, key=lambda x: (x[0], float(x[2]), float(x[1]))))
    written.append(path)
    path = out / "nmse_vs_horizon.csv"
    _write(path, ("model", "horizon_lambda", "snr_db", "nmse_db"),
           sorted(([m, h, s, v] for m, s, h, v in rows),
                  key=lambda x: (x[0], float(x[2]), float(x[1]))))
    written.append(path)

    rmse = [[r.model, _fmt(r.snr_db), r.metric, _fmt(r.value)]
            for r in table.rows if r.metric.startswith("rmse_")]
    path = out / "rmse_vs_snr.csv"
    _write(path, ("model", "snr_db", "metric", "value"), rmse)
    written.append(path)

    cdf_rows = []
    keys = sorted({s[:3] for s in table.nse_samples})
    for key in keys:
        x, p = empirical_cdf(table.samples(*key))
        cdf_rows += [[key[0], _fmt(key[1]), _fmt(key[2]), _fmt(db(xi) if xi > 0 else -math.inf),
                      _fmt(pi)] for xi, pi in zip(x, p)]
    path = out / "nse_cdf.csv"
    _write(path, ("model", "snr_db", "horizon_lambda", "nse_db", "cdf"), cdf_rows)
    written.append(path)
    return written
