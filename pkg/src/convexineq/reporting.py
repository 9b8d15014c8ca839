"""Report serialization: diff-able CSV and canonical JSON.

All numeric CSV cells go through one %.12g formatter and rows keep a fixed
column order, so reports from equal-seed runs compare byte for byte.  No
report ever contains wall-clock data; timing lives in terminal output only.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

VERSION = "0.1.0"


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.12g" % v
    return str(value)


def csv_text(header: list[str], rows: list[tuple], manifest_hash: str | None = None) -> str:
    lines = []
    if manifest_hash is not None:
        lines.append(f"# manifest_hash={manifest_hash}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, manifest_hash=None) -> str:
    text = csv_text(header, rows, manifest_hash)
    Path(path).write_text(text)
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def canonical_json(obj) -> str:
    """Sorted-key, minimal-separator JSON; the hashing and diffing format."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(canonical_json(manifest).encode()).hexdigest()[:16]


def report_envelope(manifest: dict, payload: dict) -> dict:
    """Wrap a payload with the reproducibility header every report carries."""
    return {
        "manifest": _jsonable(manifest),
        "manifest_hash": manifest_hash(manifest),
        "seed": manifest.get("seed", 0),
        "version": VERSION,
        **payload,
    }


def write_json(path, manifest: dict, payload: dict) -> dict:
    report = report_envelope(manifest, payload)
    Path(path).write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    return report
