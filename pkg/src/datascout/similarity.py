"""Scalar similarity metrics between dataset pairs.

Variable-based similarity is the Dice coefficient over normalized
variable-name sets; description-based similarity is cosine over
embedding vectors. `category_match` is the single classification rule
used throughout evaluation.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, TYPE_CHECKING

from .catalog import DatasetMetadata, normalize
from .errors import ProvenanceMismatchError

if TYPE_CHECKING:
    from .embedding import EmbeddingVector


class SourceClass(enum.Enum):
    """Origin classification for a recommended dataset entry."""

    SAME_CATEGORY = "same_category"
    DIFFERENT_CATEGORY = "different_category"
    GENERATED_BY_LLM = "generated_by_llm"


def variable_set(names: Iterable[str]) -> frozenset[str]:
    """Normalized variable-name set (catalog normalization rules)."""
    return frozenset(k for k in (normalize(n) for n in names) if k)


def dice(a: Iterable[str], b: Iterable[str]) -> float:
    """Dice coefficient 2|A∩B| / (|A|+|B|) over normalized name sets.

    Two empty sets score 0 by convention: empty variable lists signal
    missing metadata, not perfect similarity.
    """
    set_a = variable_set(a)
    set_b = variable_set(b)
    total = len(set_a) + len(set_b)
    if total == 0:
        return 0.0
    return 2.0 * len(set_a & set_b) / total


def cosine(a: Iterable[float], b: Iterable[float]) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    va = list(a)
    vb = list(b)
    dot = math.fsum(x * y for x, y in zip(va, vb))
    norm_a = math.sqrt(math.fsum(x * x for x in va))
    norm_b = math.sqrt(math.fsum(y * y for y in vb))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def description_similarity(a: "EmbeddingVector", b: "EmbeddingVector") -> float:
    """Cosine between two embedding vectors of identical provenance."""
    if (a.provider_id, a.mode, a.dimension) != (b.provider_id, b.mode, b.dimension):
        raise ProvenanceMismatchError(
            f"cannot compare vectors from ({a.provider_id}, {a.mode.value}, dim {a.dimension}) "
            f"and ({b.provider_id}, {b.mode.value}, dim {b.dimension})"
        )
    return cosine(a.values, b.values)


def category_match(sample_category: str, candidate: DatasetMetadata) -> SourceClass:
    """SAME_CATEGORY iff the candidate's tags contain the category tag."""
    if normalize(sample_category) in candidate.normalized_tags():
        return SourceClass.SAME_CATEGORY
    return SourceClass.DIFFERENT_CATEGORY
