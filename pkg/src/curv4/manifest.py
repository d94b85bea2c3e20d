"""User metrics from JSON manifests."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import InputError, NonSPDMetricError
from .metric import MetricField

SPD_SPOT_CHECKS = 16

_NUMBER = {"type": "number"}
_IDENT = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}

MANIFEST_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "coordinates", "domain", "metric"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "coordinates": {"type": "array", "items": _IDENT, "minItems": 4, "maxItems": 4, "uniqueItems": True},
        "domain": {
            "type": "array",
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        },
        "metric": {
            "type": "object",
            "minProperties": 1,
            "propertyNames": {"pattern": "^g[0-3][0-3]$"},
            "additionalProperties": {"type": "string"},
        },
        "params": {"type": "object", "propertyNames": _IDENT, "additionalProperties": _NUMBER},
        "known": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "scalar": _NUMBER,
                "einstein": {"type": "boolean"},
                "lambda1": {
                    "oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]
                },
                "locally_conformally_flat": {"type": "boolean"},
                "harmonic_weyl": {"type": "boolean"},
                "compact": {"type": "boolean"},
                "complete": {"type": "boolean"},
            },
        },
    },
}


def metric_from_manifest(doc: dict, params=None) -> MetricField:
    """Validate a manifest document and build its metric (with an SPD spot-check)."""
    try:
        jsonschema.validate(doc, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"manifest invalid at {where}: {exc.message}") from None
    p = dict(doc.get("params", {}))
    p.update(params or {})
    known = dict(doc.get("known", {}))
    m = MetricField.from_strings(doc["metric"], doc["domain"], p, tuple(doc["coordinates"]), doc["name"], known)
    try:
        m.check_spd(m.halton_points(SPD_SPOT_CHECKS))
    except NonSPDMetricError as exc:
        raise InputError(f"manifest {doc['name']!r}: {exc}") from None
    return m


def load_manifest(path, params=None) -> MetricField:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read manifest {str(path)!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {str(path)!r} is not valid JSON: {exc}") from None
    return metric_from_manifest(doc, params)
