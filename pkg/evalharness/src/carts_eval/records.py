"""Readers for the engine's dataset and result files.

The harness consumes those files at the byte level and deliberately does
not import the engine. Only the fields needed for scoring are validated:
result records must carry module_id, mode, and final.text; dataset items
must carry id, catalog, and title.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaError


@dataclass(frozen=True)
class ScoredItem:
    """One item of a module, reduced to what scoring needs."""

    id: str
    catalog: str
    title: str
    supplement: str = ""

    def text(self) -> str:
        """Canonical item text: the engine's prompt construction, verbatim.

        Non-empty parts of (catalog, title, supplement) joined by " | ".
        """
        return " | ".join(
            part for part in (self.catalog, self.title, self.supplement) if part
        )


@dataclass(frozen=True)
class ModuleItems:
    module_id: str
    items: tuple[ScoredItem, ...]


@dataclass(frozen=True)
class ResultRecord:
    """One engine result line, reduced to what scoring needs."""

    module_id: str
    mode: str
    final_title: str


def _json_lines(path: str | Path):
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{line_no}: invalid JSON: {exc.msg}") from exc


def read_modules(path: str | Path) -> list[ModuleItems]:
    """Parse a dataset file into per-module item lists."""
    modules = []
    for line_no, record in _json_lines(path):
        if not isinstance(record, dict) or "module_id" not in record:
            raise SchemaError(f"{path}:{line_no}: module_id required")
        raw_items = record.get("items")
        if not isinstance(raw_items, list) or not raw_items:
            raise SchemaError(f"{path}:{line_no}: items required")
        items = []
        for raw in raw_items:
            if not isinstance(raw, dict):
                raise SchemaError(f"{path}:{line_no}: items entries must be objects")
            try:
                items.append(
                    ScoredItem(
                        id=raw["id"],
                        catalog=raw["catalog"],
                        title=raw["title"],
                        supplement=raw.get("supplement", ""),
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"{path}:{line_no}: item missing {exc.args[0]}") from exc
        modules.append(ModuleItems(module_id=record["module_id"], items=tuple(items)))
    return modules


def read_results(path: str | Path) -> list[ResultRecord]:
    """Parse an engine result file into (module_id, mode, final title) rows."""
    results = []
    for line_no, record in _json_lines(path):
        if not isinstance(record, dict):
            raise SchemaError(f"{path}:{line_no}: record must be an object")
        try:
            results.append(
                ResultRecord(
                    module_id=record["module_id"],
                    mode=record["mode"],
                    final_title=record["final"]["text"],
                )
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{path}:{line_no}: bad result record: {exc}") from exc
    return results
