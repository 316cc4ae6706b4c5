"""Persistence: sample stores, JSON reports, CSV emission.

A sample store is a JSON manifest next to a raw payload of float64
little-endian values.  The manifest pins the generating config (hashed),
count, seed, and derived stream labels, so a store can be revalidated and
regenerated bit-identically.
"""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import StorageError, UsageError

STORE_FORMAT = "errorlab-samples"
STORE_VERSION = 1
_DTYPE = "<f8"

try:
    import jsonschema
except ImportError:
    jsonschema = None


def config_hash(config: dict) -> str:
    """sha256 over the canonical JSON encoding (sorted keys, tight separators)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def sample_store_write(base, values, config: dict, seed: int,
                       derived_streams=("model",)) -> Path:
    """Write `<base>.json` + `<base>.bin`; returns the manifest path."""
    base = Path(base)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise UsageError("sample payload must be one-dimensional")
    bin_path = base.with_suffix(".bin")
    manifest_path = base.with_suffix(".json")
    base.parent.mkdir(parents=True, exist_ok=True)
    bin_path.write_bytes(arr.astype(_DTYPE).tobytes())
    manifest = {
        "format": STORE_FORMAT,
        "version": STORE_VERSION,
        "tool_version": __version__,
        "created": _utc_now(),
        "config": config,
        "config_sha256": config_hash(config),
        "count": int(arr.size),
        "seed": int(seed),
        "dtype": _DTYPE,
        "payload": bin_path.name,
        "derived_streams": list(derived_streams),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def sample_store_read(base):
    """Load (values, manifest) from a store written by sample_store_write.

    Accepts the base path, the manifest path, or the payload path."""
    base = Path(base)
    manifest_path = base if base.suffix == ".json" else base.with_suffix(".json")
    if not manifest_path.exists():
        raise StorageError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise StorageError(f"manifest is not valid JSON: {manifest_path}: {e}") from e
    if manifest.get("format") != STORE_FORMAT:
        raise StorageError(f"not a sample store manifest: {manifest_path}")
    if manifest.get("dtype") != _DTYPE:
        raise StorageError(f"unsupported payload dtype {manifest.get('dtype')!r}")
    if config_hash(manifest["config"]) != manifest["config_sha256"]:
        raise StorageError("config hash mismatch: manifest config was edited")
    payload_path = manifest_path.parent / manifest["payload"]
    if not payload_path.exists():
        raise StorageError(f"payload not found: {payload_path}")
    blob = payload_path.read_bytes()
    count = int(manifest["count"])
    if len(blob) != 8 * count:
        raise StorageError(
            f"payload length {len(blob)} != 8 * count {count}")
    return np.frombuffer(blob, dtype=_DTYPE).copy(), manifest


# ------------------------------------------------------------------ reports


def report_schema() -> dict:
    text = resources.files("errorlab").joinpath("report_schema.json").read_text()
    return json.loads(text)


def validate_report(obj: dict) -> None:
    """Schema-validate a report envelope; quiet no-op without jsonschema."""
    if jsonschema is None:
        return
    jsonschema.validate(obj, report_schema())


def report_envelope(kind: str, config: dict, results) -> dict:
    return {
        "tool": "errorlab",
        "tool_version": __version__,
        "kind": kind,
        "created": _utc_now(),
        "config": config,
        "results": results,
    }


def write_report_json(path, kind: str, config: dict, results) -> dict:
    obj = report_envelope(kind, config, results)
    validate_report(obj)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return obj


def write_csv(path, header, rows) -> None:
    """RFC-4180 CSV (CRLF, minimal quoting) with a single header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def write_values_bin(path, values) -> None:
    """Raw float64-LE payload, no framing (the `bin` output format)."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(arr.astype(_DTYPE).tobytes())
