"""Adapter for HDX-style package metadata dumps.

HDX (a CKAN portal) exports package metadata with different key names
than the native catalog format: `title` for the display name, `notes`
for the summary, tags as objects, and column names buried in resources.
This module maps one HDX package object to a native catalog record;
plug it into `catalog.ingest` as the adapter.
"""

from __future__ import annotations

from typing import Iterable

from .catalog import IngestResult, ingest


def _tag_names(raw: object) -> list[str]:
    if not isinstance(raw, list):
        return []
    out: list[str] = []
    for item in raw:
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, dict) and isinstance(item.get("name"), str):
            out.append(item["name"])
    return out


def _field_names(raw: object) -> list[str]:
    if not isinstance(raw, list):
        return []
    out: list[str] = []
    for item in raw:
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, dict):
            for key in ("name", "id", "field"):
                if isinstance(item.get(key), str):
                    out.append(item[key])
                    break
    return out


def hdx_record_to_native(obj: dict) -> dict:
    """Map an HDX package object to the native catalog record shape."""
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    name = obj.get("title") or obj.get("name")
    variables = _field_names(obj.get("fields") or obj.get("variables"))
    if not variables:
        for resource in obj.get("resources") or []:
            if isinstance(resource, dict):
                variables.extend(_field_names(resource.get("fields")))
    record: dict = {
        "name": name,
        "summary": obj.get("notes") or obj.get("summary") or "",
        "variables": variables,
        "tags": _tag_names(obj.get("tags")),
    }
    if isinstance(obj.get("id"), str):
        record["id"] = obj["id"]
    url = obj.get("source_url") or obj.get("url")
    if isinstance(url, str):
        record["source_url"] = url
    return record


def ingest_hdx(source: Iterable[str] | str) -> IngestResult:
    """Ingest a line-delimited file of HDX package objects."""
    return ingest(source, adapter=hdx_record_to_native)
