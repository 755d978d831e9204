"""Loading and schema validation for report-bundle artifacts."""

from __future__ import annotations

import json
from pathlib import Path

SUPPORTED_SCHEMA = "1"

# figure kind -> artifact kind it consumes
ARTIFACT_KINDS = {
    "engagement": "engagement",
    "km": "survival",
    "joint": "joint_leaning",
    "timeseries": "timeseries",
}


class SchemaMismatch(Exception):
    """Input artifact does not match the schema this renderer understands."""


def load_artifact(path, figure_kind: str) -> dict:
    try:
        artifact = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"cannot read artifact {path}: {exc}") from exc
    version = artifact.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaMismatch(
            f"artifact {path} carries schema version {version!r}, "
            f"this renderer supports {SUPPORTED_SCHEMA!r}"
        )
    expected = ARTIFACT_KINDS[figure_kind]
    actual = artifact.get("kind")
    if actual != expected:
        raise SchemaMismatch(
            f"artifact {path} is of kind {actual!r}, figure {figure_kind!r} "
            f"needs {expected!r}"
        )
    return artifact
