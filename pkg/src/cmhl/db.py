"""Curve database: JSON-lines ingestion and the bundled fixtures."""

from __future__ import annotations

import json
from importlib import resources

from .cmcurve import CMCurve, load_curve


class ParseError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def ingest(path: str) -> dict:
    """Load and validate a JSON-lines curve file; labels must be unique."""
    db = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(path, lineno, f"invalid JSON: {e}") from e
            try:
                curve = load_curve(record)
            except Exception as e:
                raise ParseError(path, lineno, str(e)) from e
            if curve.label in db:
                raise ParseError(path, lineno, f"duplicate label {curve.label}")
            db[curve.label] = curve
    return db


def bundled_curves() -> dict:
    """The shipped database: one curve per class-number-one discriminant."""
    db = {}
    text = resources.files("cmhl").joinpath("data/curves.jsonl").read_text()
    for line in text.splitlines():
        if line.strip():
            curve = load_curve(json.loads(line))
            db[curve.label] = curve
    return db


def get_curve(label: str, path: str | None = None) -> CMCurve:
    db = ingest(path) if path else bundled_curves()
    if label not in db:
        raise KeyError(f"unknown curve label {label!r}; have {sorted(db)}")
    return db[label]
