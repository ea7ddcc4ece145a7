"""Export-file loading with fail-fast schema checks.

Everything here reads the JSON documents the trainer/analyzer CLI exports;
nothing ever imports or invokes that package. Missing files and missing
fields are reported by name.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class ExportError(RuntimeError):
    """Missing or malformed export file; message names the offender."""


def load_json(path, required_fields=()):
    path = Path(path)
    if not path.exists():
        raise ExportError(f"required export file missing: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ExportError(f"export file {path} is not valid JSON: {exc}")
    for field in required_fields:
        if field not in doc:
            raise ExportError(f"export file {path} lacks field {field!r}")
    return doc


def load_report(path, tables=()):
    """Load an analysis report and hand back its tables as numpy columns."""
    doc = load_json(path, required_fields=("analysis_id", "tables"))
    out = {}
    for name in tables:
        if name not in doc["tables"]:
            raise ExportError(f"export file {path} lacks table {name!r}")
        out[name] = {k: np.asarray(v) for k, v in doc["tables"][name].items()}
    out["_meta"] = {k: doc.get(k) for k in ("analysis_id", "pass", "config")}
    return out


def load_mesh(path):
    doc = load_json(path, required_fields=("theta1_grid", "theta2_grid",
                                           "t", "n", "states"))
    g1, g2 = len(doc["theta1_grid"]), len(doc["theta2_grid"])
    states = np.asarray(doc["states"]).reshape(g1, g2, doc["n"])
    out = {
        "theta1": np.asarray(doc["theta1_grid"]),
        "theta2": np.asarray(doc["theta2_grid"]),
        "t": doc["t"],
        "states": states,
    }
    if "K" in doc:
        out["K"] = np.asarray(doc["K"]).reshape(g1, g2)
        out["invalid"] = np.asarray(doc["invalid_mask"]).reshape(g1, g2) > 0
    if "pca" in doc:
        out["pca_projections"] = np.asarray(doc["pca"]["projections"])
    return out


def load_curvature(path):
    doc = load_json(path, required_fields=("theta1_grid", "theta2_grid", "K",
                                           "invalid_mask"))
    g1, g2 = len(doc["theta1_grid"]), len(doc["theta2_grid"])
    return {
        "theta1": np.asarray(doc["theta1_grid"]),
        "theta2": np.asarray(doc["theta2_grid"]),
        "t": doc.get("t"),
        "K": np.asarray(doc["K"]).reshape(g1, g2),
        "invalid": np.asarray(doc["invalid_mask"]).reshape(g1, g2) > 0,
        "extrema": doc.get("extrema"),
    }


def rows_where(table, **conds):
    """Boolean-select rows of a column table by equality conditions."""
    mask = None
    for key, val in conds.items():
        cur = table[key] == val
        mask = cur if mask is None else (mask & cur)
    return {k: v[mask] for k, v in table.items()}
