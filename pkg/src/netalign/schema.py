"""Versioned JSON schemas for network files and reports."""

from __future__ import annotations

import jsonschema

NETWORK_SCHEMA_VERSION = "1"
REPORT_SCHEMA_VERSION = "1"

NETWORK_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "netalign delay network",
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges", "sources", "destinations"],
    "properties": {
        "version": {"const": NETWORK_SCHEMA_VERSION},
        "nodes": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "tail", "head", "delay"],
                "properties": {
                    "id": {"type": "string"},
                    "tail": {"type": "string"},
                    "head": {"type": "string"},
                    "delay": {"type": "integer", "minimum": 1},
                },
            },
        },
        "sources": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
        "destinations": {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3},
    },
}


class SchemaError(ValueError):
    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def check_network_document(doc) -> None:
    try:
        jsonschema.validate(doc, NETWORK_SCHEMA)
    except jsonschema.ValidationError as err:
        loc = "$" + "".join(f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)
        raise SchemaError(err.message, loc) from None
