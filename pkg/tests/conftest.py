"""Shared fixtures: the bundled corpus, deterministic provider, indices."""

from __future__ import annotations

import pytest

from datascout.catalog import Catalog, ingest
from datascout.embedding import CompositionMode, HashEmbeddingProvider
from datascout.fixtures import corpus_path, hdx_slice_path
from datascout.pipeline import simulated_llm_client
from datascout.vector_store import build_index

DIMENSION = 64
SEED = 7


@pytest.fixture(scope="session")
def corpus() -> Catalog:
    result = ingest(corpus_path())
    assert not result.errors
    return result.catalog


@pytest.fixture(scope="session")
def provider() -> HashEmbeddingProvider:
    return HashEmbeddingProvider(dimension=DIMENSION, seed=SEED)


@pytest.fixture(scope="session")
def indexes(corpus, provider):
    return {mode: build_index(corpus, mode, provider) for mode in CompositionMode}


@pytest.fixture(scope="session")
def sim_llm():
    return simulated_llm_client()


@pytest.fixture(scope="session")
def hdx_slice_file():
    return hdx_slice_path()
