"""Output artifacts: the series CSV and versioned JSON reports.

Series CSV schema (schema_version 1): header
t,l2,weighted,h1,h2_partial,bracket2,trace0,ut_l2,ut_weighted,boundary_leak
one row per snapshot, 17 significant digits.  JSON reports carry a top-level
schema_version, the experiment kind, a generated_at stamp (the only
nondeterministic field), and the raw config text for provenance.  All files
are written atomically (temp file + rename in the target directory).
"""

from __future__ import annotations

import datetime
import json
import os
import tempfile

import numpy as np

from .functionals import CSV_COLUMNS, FunctionalSeries

SCHEMA_VERSION = 1


def atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_series_csv(series: FunctionalSeries) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for snap in series:
        lines.append(",".join(f"{v:.17g}" for v in snap.row()))
    return "\n".join(lines) + "\n"


def write_series_csv(path, series: FunctionalSeries) -> None:
    atomic_write_text(path, format_series_csv(series))


def load_series_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"series header {header} does not match {list(CSV_COLUMNS)}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(CSV_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}


def report_envelope(kind: str, config_text: str | None, **payload) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config_text,
    }
    doc.update(payload)
    return doc


def write_json(path, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, allow_nan=True) + "\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
