"""Exception types shared across the engine."""

from __future__ import annotations


class DataScoutError(Exception):
    """Base class for all engine errors."""


class ContractError(DataScoutError):
    """A caller or provider violated an interface precondition."""


class EmptyCatalogError(DataScoutError):
    pass


class UnknownDatasetError(DataScoutError):
    def __init__(self, dataset_id: str):
        super().__init__(f"unknown dataset id: {dataset_id!r}")
        self.dataset_id = dataset_id


class DimensionMismatchError(ContractError):
    pass


class ProvenanceMismatchError(ContractError):
    """Vectors from different providers/modes were combined."""


class ProviderContractError(ContractError):
    """An embedding provider returned output violating its declared contract."""


class TransportError(DataScoutError):
    """A remote call failed at the transport level.

    `retryable` advises callers whether a retry is worthwhile.
    """

    def __init__(self, message: str, *, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class IndexBuildError(DataScoutError):
    """Index build aborted; no index was emitted."""

    def __init__(self, failed_ids: list[str], cause: str = ""):
        detail = f": {cause}" if cause else ""
        super().__init__(f"embedding failed for {len(failed_ids)} dataset(s) {failed_ids}{detail}")
        self.failed_ids = list(failed_ids)


class IndexLoadError(DataScoutError):
    """An index file could not be loaded."""


class IndexCorruptError(IndexLoadError):
    pass


class IndexVersionError(IndexLoadError):
    pass


class DeficientCategoryError(DataScoutError):
    def __init__(self, category: str, needed: int, found: int):
        super().__init__(
            f"category {category!r} has {found} eligible dataset(s), {needed} required"
        )
        self.category = category
        self.needed = needed
        self.found = found


class PipelineError(DataScoutError):
    """A pipeline stage after retrieval failed.

    Carries the completed retrieval hit list so the pre-LLM path can
    still be evaluated.
    """

    def __init__(self, message: str, hits=()):
        super().__init__(message)
        self.hits = tuple(hits)
