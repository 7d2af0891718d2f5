"""Metadata text composition and pluggable embedding providers.

Three composition modes control which metadata items form the embedding
input: D (name, summary, tags), V (variables, tags), DV (all four).
Providers turn composed text into fixed-dimension vectors; three ship
here: a deterministic hash-based embedder for tests and demos, a remote
JSON-over-HTTP client, and a loader for precomputed vector files.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import requests

from .catalog import DatasetMetadata
from .errors import ContractError, ProviderContractError, TransportError


class CompositionMode(enum.Enum):
    D = "d"
    V = "v"
    DV = "dv"

    @classmethod
    def parse(cls, text: str) -> "CompositionMode":
        key = text.strip().lower().replace("+", "")
        for mode in cls:
            if mode.value == key:
                return mode
        raise ValueError(f"unknown composition mode {text!r} (expected d, v, or dv)")

    @property
    def label(self) -> str:
        return {"d": "D", "v": "V", "dv": "D+V"}[self.value]


_MODE_SECTIONS: dict[CompositionMode, tuple[str, ...]] = {
    CompositionMode.D: ("Name", "Summary", "Tags"),
    CompositionMode.V: ("Variables", "Tags"),
    CompositionMode.DV: ("Name", "Summary", "Variables", "Tags"),
}


def compose(meta: DatasetMetadata, mode: CompositionMode) -> str:
    """Render the metadata items selected by `mode` as labeled sections.

    One `<Label>: <content>` line per section, fixed section order,
    list items joined by ", ". Empty fields render with empty content so
    the layout stays byte-stable.
    """
    content = {
        "Name": meta.name,
        "Summary": meta.summary,
        "Variables": ", ".join(meta.variables),
        "Tags": ", ".join(meta.tags),
    }
    return "\n".join(f"{label}: {content[label]}" for label in _MODE_SECTIONS[mode])


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension real vector plus its provenance."""

    values: tuple[float, ...]
    provider_id: str
    mode: CompositionMode
    truncated: bool = False

    @property
    def dimension(self) -> int:
        return len(self.values)


class EmbeddingProvider:
    """Contract for embedding sources.

    Implementations must be deterministic for identical input text (the
    remote provider documents whether the upstream service guarantees
    this). `embed_text` returns the raw vector plus a truncation flag.
    """

    provider_id: str
    dimension: int
    max_input_length: int | None = None  # provider-defined units; None = unbounded

    def embed_text(self, text: str) -> tuple[list[float], bool]:
        raise NotImplementedError

    def embed_dataset(self, meta: DatasetMetadata, mode: CompositionMode) -> tuple[list[float], bool]:
        """Vector for one dataset; default path composes then embeds."""
        return self.embed_text(compose(meta, mode))


def embed(text: str, provider: EmbeddingProvider, mode: CompositionMode) -> EmbeddingVector:
    """Embed `text`, validating the provider's declared contract."""
    if not text:
        raise ContractError("cannot embed empty text")
    values, truncated = provider.embed_text(text)
    return _check_vector(values, provider, mode, truncated)


def embed_dataset(
    meta: DatasetMetadata, mode: CompositionMode, provider: EmbeddingProvider
) -> EmbeddingVector:
    values, truncated = provider.embed_dataset(meta, mode)
    return _check_vector(values, provider, mode, truncated)


def embed_query(
    task_question: str,
    meta: DatasetMetadata,
    mode: CompositionMode,
    provider: EmbeddingProvider,
) -> EmbeddingVector:
    """Embed a task query: question text plus the composed metadata."""
    return embed(task_question + "\n" + compose(meta, mode), provider, mode)


def _check_vector(
    values: Sequence[float],
    provider: EmbeddingProvider,
    mode: CompositionMode,
    truncated: bool,
) -> EmbeddingVector:
    if len(values) != provider.dimension:
        raise ProviderContractError(
            f"provider {provider.provider_id!r} returned dimension {len(values)}, "
            f"declared {provider.dimension}"
        )
    if any(not math.isfinite(v) for v in values):
        raise ProviderContractError(
            f"provider {provider.provider_id!r} returned non-finite values"
        )
    return EmbeddingVector(
        values=tuple(float(v) for v in values),
        provider_id=provider.provider_id,
        mode=mode,
        truncated=truncated,
    )


class HashEmbeddingProvider(EmbeddingProvider):
    """Deterministic pseudo-embedder: token-hash bag, length-normalized.

    Each word token hashes to one coordinate (+/-1); the accumulated bag
    is L2-normalized. A pure function of the input text, so index builds
    and golden files are bit-reproducible. Not a semantic model.
    """

    def __init__(self, dimension: int = 64, seed: int = 0, max_input_length: int | None = None):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.seed = seed
        self.max_input_length = max_input_length  # unit: word tokens
        self.provider_id = f"hash-d{dimension}-s{seed}"

    def embed_text(self, text: str) -> tuple[list[float], bool]:
        tokens = text.casefold().split()
        truncated = False
        if self.max_input_length is not None and len(tokens) > self.max_input_length:
            tokens = tokens[: self.max_input_length]
            truncated = True
        vec = [0.0] * self.dimension
        for token in tokens:
            digest = hashlib.blake2b(
                f"{self.seed}\x1f{token}".encode("utf-8"), digest_size=16
            ).digest()
            index = int.from_bytes(digest[:8], "big") % self.dimension
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[index] += sign
        norm = math.sqrt(math.fsum(v * v for v in vec))
        if norm > 0.0:
            vec = [v / norm for v in vec]
        return vec, truncated


class RemoteEmbeddingProvider(EmbeddingProvider):
    """Client for a JSON-over-HTTP embeddings endpoint.

    Request: {"model": <id>, "input": [<texts>]}; response:
    {"data": [{"embedding": [floats]}, ...]}. Configure the endpoint via
    EMBED_API_BASE / EMBED_API_KEY or constructor arguments. Inputs
    longer than `max_input_length` characters are truncated client-side
    at a whitespace boundary and flagged.
    """

    def __init__(
        self,
        model_id: str,
        dimension: int,
        base_url: str | None = None,
        api_key: str | None = None,
        max_input_length: int | None = None,
        timeout: float = 30.0,
        max_retries: int = 3,
        session: requests.Session | None = None,
    ):
        base = base_url or os.environ.get("EMBED_API_BASE")
        if not base:
            raise ValueError("remote embedding endpoint not configured (EMBED_API_BASE)")
        self.base_url = base.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("EMBED_API_KEY")
        self.provider_id = model_id
        self.model_id = model_id
        self.dimension = dimension
        self.max_input_length = max_input_length  # unit: characters
        self.timeout = timeout
        self.max_retries = max_retries
        self._session = session or requests.Session()

    def _truncate(self, text: str) -> tuple[str, bool]:
        limit = self.max_input_length
        if limit is None or len(text) <= limit:
            return text, False
        cut = text[:limit]
        boundary = cut.rsplit(None, 1)
        if len(boundary) == 2 and boundary[0]:
            cut = boundary[0]
        return cut, True

    def embed_text(self, text: str) -> tuple[list[float], bool]:
        payload_text, truncated = self._truncate(text)
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {"model": self.model_id, "input": [payload_text]}
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(min(2 ** (attempt - 1), 8.0))
            try:
                resp = self._session.post(
                    f"{self.base_url}/embeddings",
                    json=body,
                    headers=headers,
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"embeddings endpoint returned {resp.status_code}: {resp.text[:200]}",
                    retryable=False,
                )
            try:
                data = resp.json()["data"]
                values = data[0]["embedding"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise ProviderContractError(f"malformed embeddings response: {exc}") from exc
            if not isinstance(values, list):
                raise ProviderContractError("embedding is not an array")
            return [float(v) for v in values], truncated
        raise TransportError(
            f"embeddings endpoint unreachable after {self.max_retries} attempts: {last_error}"
        )


class FileEmbeddingProvider(EmbeddingProvider):
    """Precomputed vectors loaded from a line-delimited file.

    Records: {"dataset_id": str, "mode": "d"|"v"|"dv", "provider_id": str,
    "values": [floats]}. Records may instead carry "text_sha256" to serve
    arbitrary-text lookups (query vectors). All records must agree on
    provider_id and dimension.
    """

    def __init__(self, path: str | Path):
        self._by_dataset: dict[tuple[str, str], list[float]] = {}
        self._by_text: dict[str, list[float]] = {}
        provider_id: str | None = None
        dimension: int | None = None
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                values = [float(v) for v in obj["values"]]
                pid = obj["provider_id"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad vector record: {exc}") from exc
            if provider_id is None:
                provider_id, dimension = pid, len(values)
            elif pid != provider_id or len(values) != dimension:
                raise ValueError(
                    f"{path}:{lineno}: inconsistent provenance "
                    f"(expected {provider_id}, dim {dimension})"
                )
            if "dataset_id" in obj:
                self._by_dataset[(obj["dataset_id"], obj.get("mode", ""))] = values
            if "text_sha256" in obj:
                self._by_text[obj["text_sha256"]] = values
        if provider_id is None:
            raise ValueError(f"{path}: no vector records found")
        self.provider_id = provider_id
        self.dimension = dimension or 0
        self.max_input_length = None

    def embed_dataset(self, meta: DatasetMetadata, mode: CompositionMode) -> tuple[list[float], bool]:
        key = (meta.id, mode.value)
        if key not in self._by_dataset:
            raise ContractError(
                f"no precomputed vector for dataset {meta.id!r} in mode {mode.value!r}"
            )
        return self._by_dataset[key], False

    def embed_text(self, text: str) -> tuple[list[float], bool]:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        if digest not in self._by_text:
            raise ContractError(
                "file provider has no vector for this text "
                f"(sha256 {digest[:12]}...); precompute it or use another provider"
            )
        return self._by_text[digest], False
