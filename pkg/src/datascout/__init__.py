"""datascout: metadata-based dataset exploration engine.

Vector retrieval over composed metadata embeddings, LLM-filtered
recommendation, and an evaluation harness for four dataset-search tasks
(similar datasets, combinable datasets, tag estimation, variable
estimation).
"""

__version__ = "0.1.0"

from .catalog import Catalog, DatasetMetadata, ingest, stats, write_catalog
from .embedding import CompositionMode, EmbeddingVector, HashEmbeddingProvider, compose
from .pipeline import RagPipeline, TaskKind, simulated_llm_client
from .similarity import SourceClass, category_match, description_similarity, dice
from .vector_store import VectorIndex, build_index, top_n

__all__ = [
    "Catalog",
    "CompositionMode",
    "DatasetMetadata",
    "EmbeddingVector",
    "HashEmbeddingProvider",
    "RagPipeline",
    "SourceClass",
    "TaskKind",
    "VectorIndex",
    "build_index",
    "category_match",
    "compose",
    "description_similarity",
    "dice",
    "ingest",
    "simulated_llm_client",
    "stats",
    "top_n",
    "write_catalog",
]
