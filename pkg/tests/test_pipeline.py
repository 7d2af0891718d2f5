"""Question rendering, prompt building, LLM clients, parsing, task runs."""

from __future__ import annotations

import json

import pytest

from datascout.catalog import Catalog, DatasetMetadata
from datascout.embedding import CompositionMode, HashEmbeddingProvider
from datascout.errors import ContractError, PipelineError, TransportError
from datascout.pipeline import (
    PROMPT_TEMPLATE,
    QUESTIONS,
    RagPipeline,
    RecommendationOutcome,
    RemoteLlmClient,
    RunLog,
    ScriptedLlmClient,
    TaskKind,
    build_prompt,
    candidate_labels,
    parse_list_items,
    parse_ranked_list,
    prompt_sha256,
    render_question,
    simulate_llm_response,
    simulated_llm_client,
)
from datascout.similarity import SourceClass
from datascout.vector_store import build_index


@pytest.fixture(scope="module")
def sample(corpus):
    return corpus.get("weather-01")


@pytest.fixture(scope="module")
def pipeline(corpus, indexes, provider, sim_llm):
    return RagPipeline(corpus, indexes, provider, sim_llm)


def test_task_parse_accepts_numbers_and_names():
    assert TaskKind.parse("1") is TaskKind.SIMILAR
    assert TaskKind.parse("combinable") is TaskKind.COMBINABLE
    assert TaskKind.parse("4") is TaskKind.VARIABLE_ESTIMATION
    with pytest.raises(ValueError):
        TaskKind.parse("5")


def test_question_beginnings(sample):
    assert render_question(TaskKind.SIMILAR, sample).startswith(
        "Which datasets are similar to this dataset?"
    )
    assert render_question(TaskKind.COMBINABLE, sample).startswith(
        "Which datasets would be suitable to combine with this dataset?"
    )
    assert render_question(TaskKind.TAG_ESTIMATION, sample).startswith(
        "What tags are associated with this dataset?"
    )
    assert render_question(TaskKind.VARIABLE_ESTIMATION, sample).startswith(
        "What variables are included in this dataset?"
    )


def test_question_references_dataset_by_name(sample):
    text = render_question(TaskKind.SIMILAR, sample)
    assert sample.name in text


def test_question_appends_candidates_for_estimation(sample):
    text = render_question(TaskKind.TAG_ESTIMATION, sample, ["alpha", "beta"])
    assert text.endswith("The list below: alpha, beta")
    # recommendation tasks never get a candidate line
    rec = render_question(TaskKind.SIMILAR, sample, ["alpha"])
    assert "The list below" not in rec


def test_build_prompt_inserts_question_and_context(pipeline, sample):
    hits = pipeline.retrieve(sample, CompositionMode.DV, 10)
    question = render_question(TaskKind.SIMILAR, sample)
    bundle = build_prompt(question, hits, pipeline.catalog)
    assert question in bundle.rendered
    assert bundle.context in bundle.rendered
    assert "If you don't know the answer, just say that you don't know." in bundle.rendered
    blocks = bundle.context.split("\n\n")
    assert len(blocks) == 10
    for hit, block in zip(hits, blocks):
        assert block.startswith(f"Name: {pipeline.catalog.get(hit.dataset_id).name}")


def test_build_prompt_rejects_empty_question(pipeline, sample):
    hits = pipeline.retrieve(sample, CompositionMode.D, 3)
    with pytest.raises(ContractError):
        build_prompt("", hits, pipeline.catalog)
    with pytest.raises(ContractError):
        build_prompt("question?", [], pipeline.catalog)


def test_prompt_template_structure():
    rendered = PROMPT_TEMPLATE.format(question="Q?", context="CTX")
    assert rendered.endswith("Question: Q?\n\nContext: CTX")
    assert rendered.startswith("You are an assistant for question-answering tasks.")


# --- parsing -----------------------------------------------------------------


def test_parse_list_items_numbered_and_bulleted():
    items, warnings = parse_list_items("1. Alpha One\n2) Beta Two\n- Gamma Three\n* Delta Four")
    assert items == ["Alpha One", "Beta Two", "Gamma Three", "Delta Four"]
    assert not warnings


def test_parse_list_items_prose_warns():
    items, warnings = parse_list_items("These are all fine datasets to consider.")
    assert items == []
    assert warnings


def test_parse_ranked_list_resolution(corpus):
    text = "1. Japan - Social Development\n2. Daily Summaries of Precipitation Indicators for Canada"
    entries, warnings = parse_ranked_list(text, corpus)
    assert [(e[1]) for e in entries] == ["econ-01", "weather-01"]
    assert not warnings


def test_parse_ranked_list_unresolved(corpus):
    entries, _ = parse_ranked_list("1. Global Rainfall Atlas 2030", corpus)
    assert entries == [("Global Rainfall Atlas 2030", None)]


def test_parse_ranked_list_containment(corpus):
    entries, _ = parse_ranked_list("1. **Japan - Social Development** (economics)", corpus)
    assert entries[0][1] == "econ-01"


# --- scripted client ---------------------------------------------------------


def test_scripted_client_replays_by_hash():
    client = ScriptedLlmClient({prompt_sha256("p1"): "answer one"})
    assert client.complete("p1") == "answer one"
    with pytest.raises(TransportError):
        client.complete("p2")


def test_scripted_client_fallback_and_determinism():
    client = simulated_llm_client()
    prompt = PROMPT_TEMPLATE.format(
        question="Which datasets are similar to this dataset?",
        context="Name: First Dataset Alpha\nSummary: x\nVariables: a\nTags: t\n\n"
                "Name: Second Dataset Beta\nSummary: y\nVariables: b\nTags: t",
    )
    assert client.complete(prompt) == client.complete(prompt)
    items, _ = parse_list_items(client.complete(prompt))
    real_names = {"First Dataset Alpha", "Second Dataset Beta"}
    assert [i for i in items if i in real_names]


def test_simulator_estimation_prompts_select_from_candidates():
    prompt = PROMPT_TEMPLATE.format(
        question="What tags are associated with this dataset?\n"
                 'This dataset: "X".\nThe list below: red, green, blue, cyan, magenta',
        context="Name: Something Or Other\nSummary: s\nVariables: v\nTags: t",
    )
    items, _ = parse_list_items(simulate_llm_response(prompt))
    pool = {"red", "green", "blue", "cyan", "magenta"}
    assert items
    assert all(i in pool or i.startswith("synthetic ") for i in items)


# --- task runs ---------------------------------------------------------------


def echo_top_k_client(k: int) -> ScriptedLlmClient:
    """Fallback client that echoes the first k context names."""

    def fallback(prompt: str) -> str:
        import re

        names = re.findall(r"^(?:Context: )?Name: (.+)$", prompt, flags=re.MULTILINE)
        return "\n".join(f"{i}. {n}" for i, n in enumerate(names[:k], 1))

    return ScriptedLlmClient({}, fallback=fallback)


def test_run_task_echo_client_classifies_all(corpus, indexes, provider, sample):
    pipeline = RagPipeline(corpus, indexes, provider, echo_top_k_client(3))
    outcome = pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.DV,
                                n=10, category="weather and climate")
    assert isinstance(outcome, RecommendationOutcome)
    assert len(outcome.entries) == 3
    assert len(outcome.hits) == 10
    for entry, hit in zip(outcome.entries, outcome.hits):
        assert entry.resolved_id == hit.dataset_id
        assert entry.source in (SourceClass.SAME_CATEGORY, SourceClass.DIFFERENT_CATEGORY)


def test_run_task_hallucination_classified_generated(corpus, indexes, provider, sample):
    fake = "Totally Invented Atlas of Nowhere 2050"
    client = ScriptedLlmClient({}, fallback=lambda p: f"1. {fake}")
    pipeline = RagPipeline(corpus, indexes, provider, client)
    outcome = pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.D, n=5)
    assert len(outcome.entries) == 1
    assert outcome.entries[0].raw_name == fake
    assert outcome.entries[0].resolved_id is None
    assert outcome.entries[0].source is SourceClass.GENERATED_BY_LLM


def test_run_task_excludes_sample_from_hits(pipeline, sample):
    outcome = pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.DV, n=49)
    assert sample.id not in {h.dataset_id for h in outcome.hits}


def test_run_task_deterministic(corpus, indexes, provider, sim_llm, sample):
    a = RagPipeline(corpus, indexes, provider, sim_llm).run_task(
        TaskKind.COMBINABLE, sample, CompositionMode.DV, n=10, category="weather and climate")
    b = RagPipeline(corpus, indexes, provider, sim_llm).run_task(
        TaskKind.COMBINABLE, sample, CompositionMode.DV, n=10, category="weather and climate")
    assert a == b


def test_run_task_outcome_invariants(pipeline, corpus, sample):
    outcome = pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.V, n=10)
    for entry in outcome.entries:
        if entry.resolved_id is not None:
            assert entry.source is not SourceClass.GENERATED_BY_LLM
            assert entry.resolved_id in corpus
        else:
            assert entry.source is SourceClass.GENERATED_BY_LLM


def test_run_task_subset_script_bounded_by_n(corpus, indexes, provider, sample):
    pipeline = RagPipeline(corpus, indexes, provider, echo_top_k_client(100))
    n = 7
    outcome = pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.D, n=n)
    assert len(outcome.entries) <= n


def test_run_task_llm_failure_carries_hits(corpus, indexes, provider, sample):
    pipeline = RagPipeline(corpus, indexes, provider, ScriptedLlmClient({}))
    with pytest.raises(PipelineError) as exc_info:
        pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.DV, n=10)
    assert len(exc_info.value.hits) == 10


def test_run_task_without_llm_carries_hits(corpus, indexes, provider, sample):
    pipeline = RagPipeline(corpus, indexes, provider, llm=None)
    with pytest.raises(PipelineError) as exc_info:
        pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.DV, n=4)
    assert len(exc_info.value.hits) == 4


def test_estimation_outcome_candidates_from_retrieval(pipeline, corpus, sample):
    outcome = pipeline.run_task(TaskKind.TAG_ESTIMATION, sample, CompositionMode.DV,
                                n=10, category="weather and climate")
    expected = candidate_labels(TaskKind.TAG_ESTIMATION, outcome.hits, corpus)
    assert outcome.candidates == expected
    # candidate list is the deduplicated union over retrieved metadata
    union = set()
    for hit in outcome.hits:
        union.update(t.casefold() for t in corpus.get(hit.dataset_id).tags)
    assert {c.casefold() for c in outcome.candidates} == union


def test_candidate_labels_sorted_and_deduped(corpus, pipeline, sample):
    hits = pipeline.retrieve(sample, CompositionMode.DV, 10)
    labels = candidate_labels(TaskKind.VARIABLE_ESTIMATION, hits, corpus)
    normalized = [l.casefold() for l in labels]
    assert normalized == sorted(normalized)
    assert len(set(normalized)) == len(normalized)


def test_pipeline_rejects_provider_index_mismatch(corpus, indexes):
    other = HashEmbeddingProvider(dimension=64, seed=12345)
    with pytest.raises(ContractError):
        RagPipeline(corpus, indexes, other, None)


def test_pipeline_rejects_missing_mode(corpus, indexes, provider, sim_llm, sample):
    pipeline = RagPipeline(corpus, {CompositionMode.D: indexes[CompositionMode.D]},
                           provider, sim_llm)
    with pytest.raises(ContractError):
        pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.V)


def test_run_log_records_prompt_and_response(tmp_path, corpus, indexes, provider, sim_llm, sample):
    log_path = tmp_path / "runs.jsonl"
    with RunLog(log_path) as log:
        pipeline = RagPipeline(corpus, indexes, provider, sim_llm, run_log=log)
        pipeline.run_task(TaskKind.SIMILAR, sample, CompositionMode.D, n=5)
    entries = [json.loads(line) for line in log_path.read_text().splitlines()]
    assert len(entries) == 1
    entry = entries[0]
    assert entry["task"] == "similar"
    assert entry["sample_id"] == sample.id
    assert entry["prompt_sha256"] == prompt_sha256(entry["prompt"])
    assert "ts" in entry and "response" in entry


# --- remote chat client ------------------------------------------------------


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        return self._payload


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, **kwargs):
        self.calls.append((url, kwargs))
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def test_remote_llm_request_shape():
    session = FakeSession([FakeResponse(payload={
        "choices": [{"message": {"content": "1. Something"}}],
    })])
    client = RemoteLlmClient(model_id="chat-model", base_url="http://llm.test",
                             temperature=0.0, session=session)
    assert client.complete("the prompt") == "1. Something"
    url, kwargs = session.calls[0]
    assert url == "http://llm.test/chat/completions"
    assert kwargs["json"]["messages"] == [{"role": "user", "content": "the prompt"}]
    assert kwargs["json"]["temperature"] == 0.0


def test_remote_llm_failure_is_transport_error(monkeypatch):
    import requests as requests_mod

    monkeypatch.setattr("datascout.pipeline.time.sleep", lambda s: None)
    session = FakeSession([requests_mod.ConnectionError("down")] * 3)
    client = RemoteLlmClient(model_id="chat-model", base_url="http://llm.test",
                             session=session)
    with pytest.raises(TransportError):
        client.complete("p")
