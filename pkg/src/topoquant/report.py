"""Deterministic text and JSON rendering of analysis records."""
from __future__ import annotations

import json
from importlib import resources
from typing import Mapping

SCHEMA_NAME = "topoquant-report"
SCHEMA_VERSION = 1


def load_schema() -> dict:
    text = resources.files("topoquant").joinpath("schema/report.schema.json").read_text("utf-8")
    return json.loads(text)


def _plain(x):
    """Reduce a record to JSON types, keeping key order."""
    if isinstance(x, Mapping):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def envelope(record: Mapping, command: str | None = None, subject: str | None = None,
             status: str | None = None, golden: Mapping | None = None,
             timing: Mapping | None = None) -> dict:
    out: dict = {"schema": SCHEMA_NAME, "schema_version": SCHEMA_VERSION}
    if command:
        out["command"] = command
    if subject:
        out["subject"] = subject
    if status:
        out["status"] = status
    if golden:
        out["golden"] = dict(golden)
    if timing:
        out["timing"] = dict(timing)
    out["record"] = _plain(record)
    return out


def _text_lines(value, indent: int) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, Mapping):
        for k, v in value.items():
            if isinstance(v, (Mapping, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text_lines(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_leaf(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (Mapping, list)):
                lines.extend(_text_lines(v, indent))
            else:
                lines.append(f"{pad}{_leaf(v)}")
    else:
        lines.append(f"{pad}{_leaf(value)}")
    return lines


def _leaf(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "-"
    if isinstance(v, (Mapping, list)):
        return "{}" if isinstance(v, Mapping) else "[]"
    return str(v)


def report_render(record: Mapping, fmt: str = "text", **meta) -> bytes:
    """Render ``record`` as text (one section per top-level key) or JSON.

    Both formats preserve the record's key order, so equal inputs give
    byte-identical output.
    """
    doc = envelope(record, **meta)
    if fmt == "json":
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    head = f"# {SCHEMA_NAME} v{SCHEMA_VERSION}"
    if doc.get("command"):
        head += f" {doc['command']}"
    if doc.get("subject"):
        head += f" {doc['subject']}"
    lines = [head]
    for k, v in doc["record"].items():
        if isinstance(v, (Mapping, list)) and v:
            lines.append(f"[{k}]")
            lines.extend(_text_lines(v, 0))
        else:
            lines.append(f"{k}: {_leaf(v)}")
    if doc.get("golden"):
        lines.append("[golden]")
        lines.extend(f"{k}: {v}" for k, v in doc["golden"].items())
    if doc.get("timing"):
        lines.append("[timing]")
        lines.extend(f"{k}: {v:.3f}s" for k, v in doc["timing"].items())
    if doc.get("status"):
        lines.append(f"status: {doc['status']}")
    return ("\n".join(lines) + "\n").encode("utf-8")
