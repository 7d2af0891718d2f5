"""Bundled synthetic fixture data.

`corpus.jsonl` is a 50-record catalog (10 records in each of the five
default sample categories) in the native catalog format; `hdx_slice.jsonl`
is a 100-record slice in the HDX dump shape for exercising the foreign
format adapter. Both are generated by scripts/gen_fixtures.py and
committed so tests and demos are reproducible byte for byte.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def corpus_path() -> Path:
    return Path(str(resources.files(__name__) / "corpus.jsonl"))


def hdx_slice_path() -> Path:
    return Path(str(resources.files(__name__) / "hdx_slice.jsonl"))
