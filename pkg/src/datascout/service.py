"""HTTP query service for interactive exploration and the companion UI.

The app holds an immutable catalog and per-mode vector indices loaded at
startup; requests never mutate them. Responses echo the pipeline's
stored scores; nothing is recomputed under a different definition.
"""

from __future__ import annotations

from typing import Mapping

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .catalog import Catalog, DatasetMetadata
from .embedding import CompositionMode, EmbeddingProvider
from .errors import ContractError, PipelineError
from .pipeline import (
    EstimationOutcome,
    LlmClient,
    RagPipeline,
    RecommendationOutcome,
    TaskKind,
)
from .similarity import category_match, description_similarity, dice
from .vector_store import RetrievalHit, VectorIndex


class QueryRequest(BaseModel):
    task: str = Field(description="similar | combinable | tags | variables (or 1-4)")
    dataset_id: str
    mode: str = "dv"
    n: int = Field(default=10, ge=1)
    use_llm: bool = False


def _meta_body(rec: DatasetMetadata) -> dict:
    return {
        "id": rec.id,
        "name": rec.name,
        "summary": rec.summary,
        "variables": list(rec.variables),
        "tags": list(rec.tags),
        "source_url": rec.source_url,
    }


def create_app(
    catalog: Catalog,
    indexes: Mapping[CompositionMode, VectorIndex],
    provider: EmbeddingProvider,
    llm: LlmClient | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    app = FastAPI(title="datascout", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    pipeline = RagPipeline(catalog, indexes, provider, llm)

    def enrich_hit(hit: RetrievalHit, sample: DatasetMetadata, category: str,
                   index: VectorIndex) -> dict:
        rec = catalog.get(hit.dataset_id)
        return {
            "dataset_id": hit.dataset_id,
            "name": rec.name,
            "rank": hit.rank,
            "score": hit.score,
            "source": category_match(category, rec).value,
            "dice": dice(sample.variables, rec.variables),
            "description_similarity": description_similarity(
                index.vector_for(sample.id), index.vector_for(rec.id)
            ),
        }

    def retrieval_body(task: TaskKind, sample: DatasetMetadata, mode: CompositionMode,
                       n: int, category: str, hits) -> dict:
        index = pipeline.indexes[mode]
        return {
            "task": task.value,
            "dataset_id": sample.id,
            "mode": mode.value,
            "n": n,
            "query_category": category,
            "hits": [enrich_hit(h, sample, category, index) for h in hits],
            "recommendation": None,
            "estimation": None,
        }

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "datasets": len(catalog)}

    @app.get("/v1/datasets/{dataset_id}")
    def get_dataset(dataset_id: str) -> dict:
        if dataset_id not in catalog:
            raise HTTPException(status_code=404, detail={
                "error": "unknown_dataset", "dataset_id": dataset_id,
            })
        return _meta_body(catalog.get(dataset_id))

    @app.get("/v1/datasets")
    def search_datasets(
        query: str = Query(default=""),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=20, ge=1, le=200),
    ) -> dict:
        matches = catalog.search_names(query) if query else list(catalog.records)
        page = matches[offset : offset + limit]
        return {
            "total": len(matches),
            "offset": offset,
            "results": [{"id": r.id, "name": r.name, "tags": list(r.tags)} for r in page],
        }

    @app.post("/v1/query")
    def query(request: QueryRequest):
        if request.dataset_id not in catalog:
            raise HTTPException(status_code=404, detail={
                "error": "unknown_dataset", "dataset_id": request.dataset_id,
            })
        try:
            task = TaskKind.parse(request.task)
            mode = CompositionMode.parse(request.mode)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail={"error": "bad_request",
                                                         "message": str(exc)})
        if mode not in pipeline.indexes:
            raise HTTPException(status_code=422, detail={
                "error": "mode_not_indexed", "mode": mode.value,
            })
        sample = catalog.get(request.dataset_id)
        category = sample.tags[0] if sample.tags else ""
        index = pipeline.indexes[mode]
        if not request.use_llm:
            try:
                hits = pipeline.retrieve(sample, mode, request.n, task=task)
            except ContractError as exc:
                raise HTTPException(status_code=422, detail={"error": "contract",
                                                             "message": str(exc)})
            body = retrieval_body(task, sample, mode, request.n, category, hits)
            body["use_llm"] = False
            return body
        try:
            outcome = pipeline.run_task(task, sample, mode, n=request.n, category=category)
        except PipelineError as exc:
            partial = retrieval_body(task, sample, mode, request.n, category, exc.hits)
            partial["use_llm"] = True
            return JSONResponse(status_code=502, content={
                "error": "llm_unavailable",
                "message": str(exc),
                "partial": partial,
            })
        body = retrieval_body(task, sample, mode, request.n, category, outcome.hits)
        body["use_llm"] = True
        if isinstance(outcome, RecommendationOutcome):
            entries = []
            for entry in outcome.entries:
                row: dict = {
                    "raw_name": entry.raw_name,
                    "resolved_id": entry.resolved_id,
                    "resolved_name": None,
                    "source": entry.source.value,
                    "dice": None,
                    "description_similarity": None,
                }
                if entry.resolved_id is not None:
                    rec = catalog.get(entry.resolved_id)
                    row["resolved_name"] = rec.name
                    row["dice"] = dice(sample.variables, rec.variables)
                    row["description_similarity"] = description_similarity(
                        index.vector_for(sample.id), index.vector_for(rec.id)
                    )
                entries.append(row)
            body["recommendation"] = {"entries": entries, "warnings": list(outcome.warnings)}
        else:
            assert isinstance(outcome, EstimationOutcome)
            body["estimation"] = {
                "predicted": list(outcome.predicted),
                "candidates": list(outcome.candidates),
                "warnings": list(outcome.warnings),
            }
        return body

    return app
