"""Validation of the solver's CSV/JSON artifact schemas (version 1).

Readers refuse anything that does not match the documented schemas, and they
validate completely before any figure file is opened, so a schema failure
never leaves a partial image behind.
"""

from __future__ import annotations

import json

import numpy as np

SCHEMA_VERSION = 1

SERIES_COLUMNS = ("t", "l2", "weighted", "h1", "h2_partial", "bracket2",
                  "trace0", "ut_l2", "ut_weighted", "boundary_leak")


class SchemaError(ValueError):
    """Input artifact does not match the documented schema."""


def load_series(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = tuple(fh.readline().strip().split(","))
        if header != SERIES_COLUMNS:
            missing = set(SERIES_COLUMNS) - set(header)
            if missing:
                raise SchemaError(f"series {path} is missing columns {sorted(missing)}")
            raise SchemaError(f"series {path} header {header} does not match the schema")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise SchemaError(f"series {path} has no rows")
    cols = {name: data[:, i] for i, name in enumerate(SERIES_COLUMNS)}
    cols["h2_composite"] = cols["h1"] + cols["h2_partial"] + cols["ut_l2"]
    return cols


def load_report(path, kind: str | None = None) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"report {path} has schema_version {doc.get('schema_version')!r}; "
            f"expected {SCHEMA_VERSION}")
    if kind is not None and doc.get("kind") != kind:
        raise SchemaError(f"report {path} has kind {doc.get('kind')!r}; expected {kind!r}")
    return doc


def require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise SchemaError(f"report {path} is missing the {key!r} entry")
    return doc[key]
