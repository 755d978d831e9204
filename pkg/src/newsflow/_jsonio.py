"""Canonical JSON serialization shared by the corpus store and report writers.

All persisted artifacts use the same byte-stable encoding (sorted keys,
two-space indent, trailing newline) so that repeated runs on unchanged
inputs reproduce files exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dump_json(obj, path) -> None:
    Path(path).write_text(dumps_canonical(obj), encoding="utf-8")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def config_hash(config: dict) -> str:
    """Stable digest of a configuration mapping (order-insensitive)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
