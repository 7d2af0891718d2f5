"""Vector index: persistence and exact top-N cosine retrieval.

The index is a brute-force exact scan, not an approximate structure:
at catalog scale (tens of thousands of records) exactness is cheap and
reproducibility matters more than speed. Indices are immutable after
build/load and safe for unrestricted concurrent queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .catalog import Catalog
from .embedding import CompositionMode, EmbeddingProvider, EmbeddingVector, embed_dataset
from .errors import (
    ContractError,
    DimensionMismatchError,
    IndexBuildError,
    IndexCorruptError,
    IndexVersionError,
)

FORMAT_NAME = "datascout.index"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalHit:
    dataset_id: str
    score: float
    rank: int  # 1-based


class VectorIndex:
    """Embedding vectors for one (provider, mode) over a catalog."""

    def __init__(
        self,
        provider_id: str,
        mode: CompositionMode,
        dimension: int,
        ids: Iterable[str],
        matrix: np.ndarray,
    ):
        self.provider_id = provider_id
        self.mode = mode
        self.dimension = dimension
        self.ids = tuple(ids)
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate dataset ids in index")
        self._matrix = np.asarray(matrix, dtype=np.float64)
        if self._matrix.shape != (len(self.ids), dimension):
            raise ValueError(
                f"matrix shape {self._matrix.shape} does not match "
                f"({len(self.ids)}, {dimension})"
            )
        self._matrix.setflags(write=False)
        self._row_by_id = {dataset_id: row for row, dataset_id in enumerate(self.ids)}
        self._norms = np.linalg.norm(self._matrix, axis=1)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, dataset_id: str) -> bool:
        return dataset_id in self._row_by_id

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, VectorIndex)
            and self.provider_id == other.provider_id
            and self.mode == other.mode
            and self.dimension == other.dimension
            and self.ids == other.ids
            and np.array_equal(self._matrix, other._matrix)
        )

    def vector_for(self, dataset_id: str) -> EmbeddingVector:
        row = self._row_by_id.get(dataset_id)
        if row is None:
            raise KeyError(dataset_id)
        return EmbeddingVector(
            values=tuple(float(v) for v in self._matrix[row]),
            provider_id=self.provider_id,
            mode=self.mode,
        )


def build_index(
    catalog: Catalog, mode: CompositionMode, provider: EmbeddingProvider
) -> VectorIndex:
    """Embed every catalog record; any per-record failure aborts the build."""
    if len(catalog) == 0:
        raise ContractError("cannot index an empty catalog")
    rows: list[tuple[float, ...]] = []
    ids: list[str] = []
    failed: list[str] = []
    first_cause = ""
    for rec in catalog:
        try:
            vec = embed_dataset(rec, mode, provider)
        except Exception as exc:
            failed.append(rec.id)
            if not first_cause:
                first_cause = str(exc)
            continue
        ids.append(rec.id)
        rows.append(vec.values)
    if failed:
        raise IndexBuildError(failed, first_cause)
    matrix = np.array(rows, dtype=np.float64)
    return VectorIndex(provider.provider_id, mode, provider.dimension, ids, matrix)


def top_n(
    index: VectorIndex,
    query: EmbeddingVector,
    n: int,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> list[RetrievalHit]:
    """The n highest-cosine records not in `exclude`, best first.

    Ties break by ascending dataset_id; fewer than n hits are returned
    when the index is small. Zero-norm vectors score 0 against anything.
    """
    if n < 1:
        raise ContractError("n must be >= 1")
    if query.dimension != index.dimension:
        raise DimensionMismatchError(
            f"query dimension {query.dimension} != index dimension {index.dimension}"
        )
    q = np.asarray(query.values, dtype=np.float64)
    q_norm = float(np.linalg.norm(q))
    if q_norm == 0.0:
        scores = np.zeros(len(index.ids))
    else:
        dots = index._matrix @ q
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = np.where(
                index._norms > 0.0, dots / (index._norms * q_norm), 0.0
            )
    order = sorted(
        (i for i, dataset_id in enumerate(index.ids) if dataset_id not in exclude),
        key=lambda i: (-scores[i], index.ids[i]),
    )
    return [
        RetrievalHit(dataset_id=index.ids[i], score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order[:n], start=1)
    ]


def save(index: VectorIndex, target: TextIO | str | Path) -> None:
    """Write the index file: one header line, then one record per vector.

    Floats are serialized with shortest round-trip decimal repr, so
    load(save(x)) is bit-exact.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fp:
            save(index, fp)
        return
    header = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "provider_id": index.provider_id,
        "mode": index.mode.value,
        "dimension": index.dimension,
        "count": len(index.ids),
    }
    target.write(json.dumps(header, sort_keys=True) + "\n")
    for row, dataset_id in enumerate(index.ids):
        record = {"dataset_id": dataset_id, "values": [float(v) for v in index._matrix[row]]}
        target.write(json.dumps(record) + "\n")


def load(source: TextIO | str | Path) -> VectorIndex:
    """Load an index file produced by `save`, validating its header."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fp:
            return load(fp)
    lines = [line for line in source.read().splitlines() if line.strip()]
    if not lines:
        raise IndexCorruptError("empty index file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IndexCorruptError(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise IndexCorruptError("not an index file (missing format marker)")
    if header.get("format_version") != FORMAT_VERSION:
        raise IndexVersionError(
            f"unsupported format_version {header.get('format_version')!r}, "
            f"this build reads version {FORMAT_VERSION}"
        )
    try:
        provider_id = header["provider_id"]
        mode = CompositionMode.parse(header["mode"])
        dimension = int(header["dimension"])
        count = int(header["count"])
    except (KeyError, ValueError) as exc:
        raise IndexCorruptError(f"bad header field: {exc}") from exc
    body = lines[1:]
    if len(body) != count:
        raise IndexCorruptError(f"header declares {count} records, file has {len(body)}")
    ids: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(body, start=2):
        try:
            obj = json.loads(line)
            dataset_id = obj["dataset_id"]
            values = [float(v) for v in obj["values"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise IndexCorruptError(f"line {lineno}: bad record: {exc}") from exc
        if len(values) != dimension:
            raise IndexCorruptError(
                f"line {lineno}: vector has {len(values)} values, header says {dimension}"
            )
        ids.append(dataset_id)
        rows.append(values)
    try:
        return VectorIndex(provider_id, mode, dimension, ids, np.array(rows, dtype=np.float64))
    except ValueError as exc:
        raise IndexCorruptError(str(exc)) from exc
