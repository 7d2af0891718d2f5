"""Retrieval-augmented task execution.

A task run walks four steps: render the natural-language query and embed
it, retrieve the top-N nearest records from the vector index, insert the
query and retrieved metadata into the fixed prompt template, and send it
to a chat-completion client. The answer is parsed back into ranked
entries and each entry is resolved against the catalog and classified by
origin.
"""

from __future__ import annotations

import datetime as _dt
import enum
import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import requests

from .catalog import Catalog, DatasetMetadata, normalize
from .embedding import CompositionMode, EmbeddingProvider, compose, embed_query
from .errors import ContractError, PipelineError, TransportError
from .similarity import SourceClass, category_match
from .vector_store import RetrievalHit, VectorIndex, top_n


class TaskKind(enum.Enum):
    SIMILAR = "similar"
    COMBINABLE = "combinable"
    TAG_ESTIMATION = "tags"
    VARIABLE_ESTIMATION = "variables"

    @property
    def number(self) -> int:
        return {"similar": 1, "combinable": 2, "tags": 3, "variables": 4}[self.value]

    @property
    def is_estimation(self) -> bool:
        return self in (TaskKind.TAG_ESTIMATION, TaskKind.VARIABLE_ESTIMATION)

    @classmethod
    def parse(cls, text: str) -> "TaskKind":
        key = text.strip().lower()
        by_number = {"1": cls.SIMILAR, "2": cls.COMBINABLE, "3": cls.TAG_ESTIMATION,
                     "4": cls.VARIABLE_ESTIMATION}
        if key in by_number:
            return by_number[key]
        for task in cls:
            if task.value == key:
                return task
        raise ValueError(f"unknown task {text!r} (expected 1-4 or a task name)")


QUESTIONS: dict[TaskKind, str] = {
    TaskKind.SIMILAR: (
        "Which datasets are similar to this dataset? "
        "Please select multiple candidates and rank them by relevance."
    ),
    TaskKind.COMBINABLE: (
        "Which datasets would be suitable to combine with this dataset? "
        "Please select multiple candidates and rank them by their combinability."
    ),
    TaskKind.TAG_ESTIMATION: (
        "What tags are associated with this dataset? "
        "Please select from the list below and sort the results by relevance."
    ),
    TaskKind.VARIABLE_ESTIMATION: (
        "What variables are included in this dataset? "
        "Please select from the list below and sort the results by relevance."
    ),
}

PROMPT_TEMPLATE = (
    "You are an assistant for question-answering tasks. "
    "Use the following pieces of retrieved context to answer the question. "
    "If you don't know the answer, just say that you don't know. "
    "Use five sentences maximum and keep the answer concise.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Context: {context}"
)

_CANDIDATE_LINE = "The list below: "


def render_question(
    task: TaskKind, sample: DatasetMetadata, candidates: Sequence[str] | None = None
) -> str:
    """Task question referencing the sample dataset by name.

    For estimation tasks the caller appends the candidate labels once
    retrieval has produced them; the embedding-stage query omits the
    list (it is not known yet).
    """
    lines = [QUESTIONS[task], f'This dataset: "{sample.name}".']
    if task.is_estimation and candidates is not None:
        lines.append(_CANDIDATE_LINE + ", ".join(candidates))
    return "\n".join(lines)


@dataclass(frozen=True)
class PromptBundle:
    question: str
    context: str
    rendered: str


def build_prompt(question: str, hits: Sequence[RetrievalHit], catalog: Catalog) -> PromptBundle:
    """Insert the question and retrieved metadata into the prompt template.

    Context renders each hit's full metadata (name, summary, variables,
    tags) as one block, in rank order, blocks separated by blank lines.
    """
    if not question:
        raise ContractError("question must be nonempty")
    if not hits:
        raise ContractError("hits must be nonempty")
    blocks = [compose(catalog.get(h.dataset_id), CompositionMode.DV) for h in hits]
    context = "\n\n".join(blocks)
    rendered = PROMPT_TEMPLATE.format(question=question, context=context)
    return PromptBundle(question=question, context=context, rendered=rendered)


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# --- LLM clients -----------------------------------------------------------


class LlmClient:
    """Chat-completion contract: one prompt in, one text answer out."""

    model_id: str = "unknown"
    temperature: float = 0.0

    def complete(self, prompt: str) -> str:
        raise NotImplementedError


class ScriptedLlmClient(LlmClient):
    """Replays canned responses keyed by prompt sha256.

    An optional `fallback` (a pure function of the prompt) answers
    prompts missing from the script; without one, a missing prompt
    raises TransportError, which exercises the same failure path as a
    real outage.
    """

    model_id = "scripted"

    def __init__(
        self,
        responses: Mapping[str, str] | None = None,
        fallback: Callable[[str], str] | None = None,
    ):
        self.responses = dict(responses or {})
        self.fallback = fallback

    def complete(self, prompt: str) -> str:
        key = prompt_sha256(prompt)
        if key in self.responses:
            return self.responses[key]
        if self.fallback is not None:
            return self.fallback(prompt)
        raise TransportError(f"no scripted response for prompt {key[:12]}", retryable=False)


_FAKE_TOPICS = ("Transport", "Climate", "Health Services", "Education Access", "Trade Flows")


def simulate_llm_response(prompt: str) -> str:
    """Deterministic stand-in for a hosted model.

    Selects a hash-chosen subset of the offered items (context dataset
    names, or the candidate labels for estimation prompts), keeps their
    order, and occasionally appends a fictional item so downstream
    hallucination accounting has something to count. Pure function of
    the prompt text.
    """
    digest = hashlib.sha256(prompt.encode("utf-8")).digest()
    candidate_match = re.search(
        rf"^{re.escape(_CANDIDATE_LINE)}(.*)$", prompt, flags=re.MULTILINE
    )
    if candidate_match:
        pool = [c.strip() for c in candidate_match.group(1).split(",") if c.strip()]
        fake = f"synthetic {_FAKE_TOPICS[digest[1] % len(_FAKE_TOPICS)].lower()} score"
    else:
        # the first context block sits on the "Context: " line itself
        pool = re.findall(r"^(?:Context: )?Name: (.+)$", prompt, flags=re.MULTILINE)
        fake = f"Regional {_FAKE_TOPICS[digest[1] % len(_FAKE_TOPICS)]} Outlook {2019 + digest[2] % 8}"
    kept = [
        item
        for item in pool
        if hashlib.blake2b(digest + item.encode("utf-8"), digest_size=1).digest()[0] < 140
    ]
    if not kept and pool:
        kept = [pool[0]]
    if digest[0] < 64:
        kept.append(fake)
    if not kept:
        return "I don't know."
    return "\n".join(f"{i}. {item}" for i, item in enumerate(kept, start=1))


def simulated_llm_client() -> ScriptedLlmClient:
    """Scripted client with the deterministic simulator as fallback."""
    return ScriptedLlmClient({}, fallback=simulate_llm_response)


class RemoteLlmClient(LlmClient):
    """JSON-over-HTTP chat-completion client.

    POSTs {"model", "messages", "temperature"} to {base}/chat/completions
    and reads choices[0].message.content. Configure via LLM_API_BASE,
    LLM_API_KEY, LLM_MODEL or constructor arguments. Temperature
    defaults to 0 for reproducibility.
    """

    def __init__(
        self,
        model_id: str | None = None,
        base_url: str | None = None,
        api_key: str | None = None,
        temperature: float = 0.0,
        max_output_tokens: int | None = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        session: requests.Session | None = None,
    ):
        base = base_url or os.environ.get("LLM_API_BASE")
        if not base:
            raise ValueError("LLM endpoint not configured (LLM_API_BASE)")
        model = model_id or os.environ.get("LLM_MODEL")
        if not model:
            raise ValueError("LLM model not configured (LLM_MODEL)")
        self.base_url = base.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.model_id = model
        self.temperature = temperature
        self.max_output_tokens = max_output_tokens
        self.timeout = timeout
        self.max_retries = max_retries
        self._session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body: dict = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        if self.max_output_tokens is not None:
            body["max_tokens"] = self.max_output_tokens
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(min(2 ** (attempt - 1), 8.0))
            try:
                resp = self._session.post(
                    f"{self.base_url}/chat/completions",
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
                    f"chat endpoint returned {resp.status_code}: {resp.text[:200]}",
                    retryable=False,
                )
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise TransportError(f"malformed chat response: {exc}", retryable=False) from exc
        raise TransportError(
            f"chat endpoint unreachable after {self.max_retries} attempts: {last_error}"
        )


# --- Answer parsing --------------------------------------------------------


_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.)]\s*|[-*]\s+)(.+?)\s*$")


def parse_list_items(text: str) -> tuple[list[str], list[str]]:
    """Extract items from numbered or bulleted lines.

    Returns (items, warnings); prose with no list markers yields an
    empty list plus a parse warning.
    """
    items: list[str] = []
    for line in text.splitlines():
        match = _ITEM_RE.match(line)
        if match:
            item = match.group(1).strip().strip("*").strip()
            if item:
                items.append(item)
    if not items:
        return [], ["no list structure detected in response"]
    return items, []


def parse_ranked_list(
    llm_output: str, catalog: Catalog
) -> tuple[list[tuple[str, str | None]], list[str]]:
    """Parse list items and resolve each against catalog names.

    Resolution is conservative: normalized exact match, then containment
    of a full catalog name in the item. Unmatched items stay unresolved.
    """
    items, warnings = parse_list_items(llm_output)
    return [(item, catalog.resolve_name(item)) for item in items], warnings


# --- Outcomes --------------------------------------------------------------


@dataclass(frozen=True)
class RecommendationEntry:
    raw_name: str
    resolved_id: str | None
    source: SourceClass


@dataclass(frozen=True)
class RecommendationOutcome:
    task: TaskKind
    sample_id: str
    mode: CompositionMode
    category: str
    entries: tuple[RecommendationEntry, ...]
    hits: tuple[RetrievalHit, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class EstimationOutcome:
    task: TaskKind
    sample_id: str
    mode: CompositionMode
    predicted: tuple[str, ...]
    candidates: tuple[str, ...]
    hits: tuple[RetrievalHit, ...]
    warnings: tuple[str, ...] = ()


def candidate_labels(task: TaskKind, hits: Sequence[RetrievalHit], catalog: Catalog) -> tuple[str, ...]:
    """Deduplicated union of tags (or variables) over the retrieved records.

    First-seen casing is kept for display; ordering is by normalized
    label so candidate lists are stable across retrieval score noise.
    """
    field = "tags" if task is TaskKind.TAG_ESTIMATION else "variables"
    seen: dict[str, str] = {}
    for hit in hits:
        for label in getattr(catalog.get(hit.dataset_id), field):
            key = normalize(label)
            if key and key not in seen:
                seen[key] = label
    return tuple(seen[key] for key in sorted(seen))


class RunLog:
    """Append-only audit log of prompts and raw responses."""

    def __init__(self, path: str | Path):
        self._fp = open(path, "a", encoding="utf-8")

    def record(
        self, *, task: TaskKind, sample_id: str, mode: CompositionMode,
        provider_id: str, prompt: str, response: str,
    ) -> None:
        entry = {
            "ts": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "task": task.value,
            "sample_id": sample_id,
            "mode": mode.value,
            "provider_id": provider_id,
            "prompt_sha256": prompt_sha256(prompt),
            "prompt": prompt,
            "response": response,
        }
        self._fp.write(json.dumps(entry, sort_keys=True) + "\n")
        self._fp.flush()

    def close(self) -> None:
        self._fp.close()

    def __enter__(self) -> "RunLog":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class RagPipeline:
    """Binds a catalog, per-mode indices, an embedding provider, and an
    LLM client into runnable tasks.

    Holds only read access to its inputs; concurrent runs are safe.
    """

    def __init__(
        self,
        catalog: Catalog,
        indexes: Mapping[CompositionMode, VectorIndex],
        provider: EmbeddingProvider,
        llm: LlmClient | None = None,
        run_log: RunLog | None = None,
    ):
        self.catalog = catalog
        self.indexes = dict(indexes)
        self.provider = provider
        self.llm = llm
        self.run_log = run_log
        for mode, index in self.indexes.items():
            if index.provider_id != provider.provider_id:
                raise ContractError(
                    f"index for mode {mode.value!r} was built with provider "
                    f"{index.provider_id!r}, pipeline uses {provider.provider_id!r}"
                )

    def _index(self, mode: CompositionMode) -> VectorIndex:
        try:
            return self.indexes[mode]
        except KeyError:
            raise ContractError(f"no index built for mode {mode.value!r}") from None

    def retrieve(
        self, sample: DatasetMetadata, mode: CompositionMode, n: int = 10,
        task: TaskKind = TaskKind.SIMILAR,
    ) -> list[RetrievalHit]:
        """Steps 1-2 only: embed the task query and scan the index.

        The sample itself is always excluded from its own results.
        """
        question = render_question(task, sample)
        query_vec = embed_query(question, sample, mode, self.provider)
        return top_n(self._index(mode), query_vec, n, exclude={sample.id})

    def run_task(
        self,
        task: TaskKind,
        sample: DatasetMetadata,
        mode: CompositionMode,
        n: int = 10,
        category: str | None = None,
    ) -> RecommendationOutcome | EstimationOutcome:
        """Full retrieval + prompt + completion + parse + classify run.

        `category` is the tag used for same/different-category
        classification; it defaults to the sample's first tag. An LLM
        transport failure raises PipelineError carrying the completed
        retrieval stage.
        """
        if n < 1:
            raise ContractError("n must be >= 1")
        if category is None:
            category = sample.tags[0] if sample.tags else ""
        hits = self.retrieve(sample, mode, n, task=task)
        candidates: tuple[str, ...] = ()
        if task.is_estimation:
            candidates = candidate_labels(task, hits, self.catalog)
            question = render_question(task, sample, candidates)
        else:
            question = render_question(task, sample)
        bundle = build_prompt(question, hits, self.catalog)
        if self.llm is None:
            raise PipelineError("no LLM client configured", hits=hits)
        try:
            response = self.llm.complete(bundle.rendered)
        except TransportError as exc:
            raise PipelineError(f"LLM call failed: {exc}", hits=hits) from exc
        if self.run_log is not None:
            self.run_log.record(
                task=task, sample_id=sample.id, mode=mode,
                provider_id=self.provider.provider_id,
                prompt=bundle.rendered, response=response,
            )
        if task.is_estimation:
            items, warnings = parse_list_items(response)
            seen: set[str] = set()
            predicted: list[str] = []
            for item in items:
                key = normalize(item)
                if key and key not in seen:
                    seen.add(key)
                    predicted.append(item)
            return EstimationOutcome(
                task=task, sample_id=sample.id, mode=mode,
                predicted=tuple(predicted), candidates=candidates,
                hits=tuple(hits), warnings=tuple(warnings),
            )
        parsed, warnings = parse_ranked_list(response, self.catalog)
        entries = []
        for raw_name, resolved_id in parsed:
            if resolved_id is None:
                source = SourceClass.GENERATED_BY_LLM
            else:
                source = category_match(category, self.catalog.get(resolved_id))
            entries.append(RecommendationEntry(raw_name, resolved_id, source))
        return RecommendationOutcome(
            task=task, sample_id=sample.id, mode=mode, category=category,
            entries=tuple(entries), hits=tuple(hits), warnings=tuple(warnings),
        )
