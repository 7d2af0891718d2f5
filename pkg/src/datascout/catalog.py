"""Dataset metadata catalog: parsing, validation, storage, and summary stats.

A catalog is an immutable collection of metadata records ("data about the
data"): name, free-text summary, variable names, and tags. Records arrive
as line-delimited JSON objects; see `ingest`.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, TextIO

from .errors import EmptyCatalogError, UnknownDatasetError


def normalize(text: str) -> str:
    """Comparison key: trim, collapse internal whitespace, casefold."""
    return " ".join(text.split()).casefold()


def display_form(text: str) -> str:
    """Display form: trim and collapse whitespace, original casing kept."""
    return " ".join(text.split())


def derive_id(name: str, source_url: str | None) -> str:
    """Stable id for records that arrive without one."""
    key = normalize(name) + "\x1f" + (source_url or "")
    return "d" + hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]


def _dedupe(items: Iterable[str]) -> tuple[str, ...]:
    """Drop duplicates by normalized key, keeping first occurrence's casing."""
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        disp = display_form(item)
        key = disp.casefold()
        if not key or key in seen:
            continue
        seen.add(key)
        out.append(disp)
    return tuple(out)


@dataclass(frozen=True)
class DatasetMetadata:
    """One catalog record.

    `variables` and `tags` are stored deduplicated (by normalized key) in
    first-seen order, whitespace-collapsed but original-cased.
    """

    id: str
    name: str
    summary: str = ""
    variables: tuple[str, ...] = ()
    tags: tuple[str, ...] = ()
    source_url: str | None = None

    def normalized_variables(self) -> frozenset[str]:
        return frozenset(normalize(v) for v in self.variables)

    def normalized_tags(self) -> frozenset[str]:
        return frozenset(normalize(t) for t in self.tags)

    def is_complete(self) -> bool:
        """Nonempty name, summary, variables, and tags."""
        return bool(self.name and self.summary and self.variables and self.tags)

    def to_record(self) -> dict:
        rec: dict = {
            "id": self.id,
            "name": self.name,
            "summary": self.summary,
            "variables": list(self.variables),
            "tags": list(self.tags),
        }
        if self.source_url is not None:
            rec["source_url"] = self.source_url
        return rec


@dataclass(frozen=True)
class CatalogStats:
    dataset_count: int
    variable_occurrences: int
    variable_types: int
    tag_occurrences: int
    tag_types: int
    max_variables_per_dataset: int
    min_variables_per_dataset: int
    max_tags_per_dataset: int
    min_tags_per_dataset: int
    mean_tags_per_dataset: float


class Catalog:
    """Immutable, id-keyed collection of DatasetMetadata.

    Safe for unrestricted concurrent reads; ingestion always builds a new
    Catalog value.
    """

    def __init__(self, records: Iterable[DatasetMetadata]):
        self._records: tuple[DatasetMetadata, ...] = tuple(records)
        self._by_id: dict[str, DatasetMetadata] = {}
        for rec in self._records:
            if rec.id in self._by_id:
                raise ValueError(f"duplicate dataset id in catalog: {rec.id!r}")
            self._by_id[rec.id] = rec
        # normalized name -> ids (ascending), for name resolution
        name_index: dict[str, list[str]] = {}
        for rec in self._records:
            name_index.setdefault(normalize(rec.name), []).append(rec.id)
        self._name_index = {k: tuple(sorted(v)) for k, v in name_index.items()}
        # longest-name-first list for containment matching
        self._containment = sorted(
            ((norm, ids[0]) for norm, ids in self._name_index.items()),
            key=lambda p: (-len(p[0]), p[0], p[1]),
        )

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[DatasetMetadata]:
        return iter(self._records)

    def __contains__(self, dataset_id: str) -> bool:
        return dataset_id in self._by_id

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Catalog) and self._records == other._records

    @property
    def records(self) -> tuple[DatasetMetadata, ...]:
        return self._records

    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self._records)

    def get(self, dataset_id: str) -> DatasetMetadata:
        try:
            return self._by_id[dataset_id]
        except KeyError:
            raise UnknownDatasetError(dataset_id) from None

    def resolve_name(self, text: str) -> str | None:
        """Match free text to a dataset id.

        Normalized exact name match first; failing that, the longest
        catalog name contained in the text. Ties go to the smallest id.
        """
        key = normalize(text)
        if not key:
            return None
        ids = self._name_index.get(key)
        if ids:
            return ids[0]
        for norm_name, dataset_id in self._containment:
            if norm_name and norm_name in key:
                return dataset_id
        return None

    def search_names(self, query: str) -> list[DatasetMetadata]:
        """Case-insensitive substring search over display names."""
        needle = normalize(query)
        return [r for r in self._records if needle in normalize(r.name)]


@dataclass(frozen=True)
class IngestIssue:
    line: int
    message: str
    record_id: str | None = None

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.record_id:
            where += f" (id {self.record_id})"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class IngestResult:
    catalog: Catalog
    warnings: tuple[IngestIssue, ...] = ()
    errors: tuple[IngestIssue, ...] = ()


def _string_list(obj: dict, key: str) -> list[str]:
    value = obj.get(key, [])
    if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
        raise ValueError(f"{key!r} must be an array of strings")
    return value


def parse_record(obj: object) -> DatasetMetadata:
    """Validate and normalize one decoded record object.

    Raises ValueError on malformed input.
    """
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    name_raw = obj.get("name")
    if not isinstance(name_raw, str):
        raise ValueError("'name' is required and must be a string")
    name = display_form(name_raw)
    if not name:
        raise ValueError("'name' is empty after whitespace normalization")
    summary = obj.get("summary", "")
    if not isinstance(summary, str):
        raise ValueError("'summary' must be a string")
    variables = _dedupe(_string_list(obj, "variables"))
    tags = _dedupe(_string_list(obj, "tags"))
    source_url = obj.get("source_url")
    if source_url is not None and not isinstance(source_url, str):
        raise ValueError("'source_url' must be a string")
    rec_id = obj.get("id")
    if rec_id is not None and (not isinstance(rec_id, str) or not rec_id.strip()):
        raise ValueError("'id' must be a nonempty string when present")
    if rec_id is None:
        rec_id = derive_id(name, source_url)
    return DatasetMetadata(
        id=rec_id.strip(),
        name=name,
        summary=summary.strip(),
        variables=variables,
        tags=tags,
        source_url=source_url,
    )


def ingest(
    source: Iterable[str] | TextIO | str | Path,
    adapter: Callable[[dict], dict] | None = None,
) -> IngestResult:
    """Ingest line-delimited JSON records into a new catalog.

    Malformed records and duplicate ids are skipped and reported as
    errors; ingestion continues. Records with empty variables or tags are
    admitted with a completeness warning.

    `adapter`, when given, maps each decoded object to the native record
    shape before validation (used for foreign formats).
    """
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    elif isinstance(source, io.TextIOBase):
        lines = source
    else:
        lines = source

    records: list[DatasetMetadata] = []
    warnings: list[IngestIssue] = []
    errors: list[IngestIssue] = []
    seen_ids: set[str] = set()

    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            errors.append(IngestIssue(lineno, f"invalid JSON at column {exc.colno}: {exc.msg}"))
            continue
        try:
            if adapter is not None:
                obj = adapter(obj)
            rec = parse_record(obj)
        except ValueError as exc:
            errors.append(IngestIssue(lineno, str(exc)))
            continue
        if rec.id in seen_ids:
            errors.append(IngestIssue(lineno, "duplicate id, record rejected", rec.id))
            continue
        seen_ids.add(rec.id)
        if not rec.variables:
            warnings.append(IngestIssue(lineno, "record has no variables", rec.id))
        if not rec.tags:
            warnings.append(IngestIssue(lineno, "record has no tags", rec.id))
        records.append(rec)

    return IngestResult(Catalog(records), tuple(warnings), tuple(errors))


def write_catalog(catalog: Catalog, target: TextIO | str | Path) -> None:
    """Serialize the catalog back to its line-delimited file format."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fp:
            write_catalog(catalog, fp)
        return
    for rec in catalog:
        target.write(json.dumps(rec.to_record()) + "\n")


def stats(catalog: Catalog) -> CatalogStats:
    """Summary statistics over normalized variable and tag names."""
    if len(catalog) == 0:
        raise EmptyCatalogError("cannot compute stats for an empty catalog")
    var_counts = [len(r.variables) for r in catalog]
    tag_counts = [len(r.tags) for r in catalog]
    var_types: set[str] = set()
    tag_types: set[str] = set()
    for rec in catalog:
        var_types.update(rec.normalized_variables())
        tag_types.update(rec.normalized_tags())
    tag_occurrences = sum(tag_counts)
    return CatalogStats(
        dataset_count=len(catalog),
        variable_occurrences=sum(var_counts),
        variable_types=len(var_types),
        tag_occurrences=tag_occurrences,
        tag_types=len(tag_types),
        max_variables_per_dataset=max(var_counts),
        min_variables_per_dataset=min(var_counts),
        max_tags_per_dataset=max(tag_counts),
        min_tags_per_dataset=min(tag_counts),
        mean_tags_per_dataset=tag_occurrences / len(catalog),
    )
