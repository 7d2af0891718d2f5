"""Evaluation harness: sample selection, source classification,
before/after similarity deltas, P/R/F1, and the full experiment grid.

The grid runs every (task, mode, sample) cell, records per-cell metrics
as line-delimited records, and emits a human-readable summary plus
plot-ready CSVs for the three standard chart families (source counts,
similarity before/after, estimation scores).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .catalog import Catalog, DatasetMetadata, normalize
from .embedding import CompositionMode, EmbeddingProvider
from .errors import ContractError, DeficientCategoryError, PipelineError
from .pipeline import (
    EstimationOutcome,
    LlmClient,
    RagPipeline,
    RecommendationOutcome,
    RunLog,
    TaskKind,
)
from .similarity import SourceClass, category_match, description_similarity, dice
from .vector_store import RetrievalHit, VectorIndex

DEFAULT_CATEGORIES: tuple[str, ...] = (
    "education",
    "economics",
    "health",
    "facilities and infrastructure",
    "weather and climate",
)


@dataclass(frozen=True)
class SamplePlan:
    """Per-category sample dataset ids, categories distinct."""

    entries: tuple[tuple[str, tuple[str, ...]], ...]

    def __iter__(self):
        for category, ids in self.entries:
            for dataset_id in ids:
                yield category, dataset_id

    def sample_count(self) -> int:
        return sum(len(ids) for _, ids in self.entries)


def _seeded_order(ids: Iterable[str], seed: int) -> list[str]:
    return sorted(ids, key=lambda i: hashlib.sha256(f"{seed}:{i}".encode()).hexdigest())


def select_samples(
    catalog: Catalog,
    categories: Sequence[str] = DEFAULT_CATEGORIES,
    per_category: int = 2,
    seed: int = 7,
) -> SamplePlan:
    """Pick sample datasets per category, deterministically.

    Eligible datasets have complete metadata, carry the category tag,
    and carry none of the plan's other category tags (so the samples'
    category tags do not overlap across categories). Selection walks a
    seeded order and takes the first `per_category` eligible records.
    """
    norm_categories = [normalize(c) for c in categories]
    if len(set(norm_categories)) != len(norm_categories):
        raise ContractError("plan categories must be distinct")
    entries: list[tuple[str, tuple[str, ...]]] = []
    ordered_ids = _seeded_order(catalog.ids(), seed)
    for category, norm_cat in zip(categories, norm_categories):
        other = set(norm_categories) - {norm_cat}
        chosen: list[str] = []
        for dataset_id in ordered_ids:
            rec = catalog.get(dataset_id)
            tags = rec.normalized_tags()
            if rec.is_complete() and norm_cat in tags and not (tags & other):
                chosen.append(dataset_id)
                if len(chosen) == per_category:
                    break
        if len(chosen) < per_category:
            raise DeficientCategoryError(category, per_category, len(chosen))
        entries.append((category, tuple(chosen)))
    return SamplePlan(tuple(entries))


def load_sample_plan(path: str | Path, catalog: Catalog) -> SamplePlan:
    """Explicit category -> dataset-id plan from a JSON file.

    Used when the category assignments are given as input data rather
    than selected from the catalog.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ContractError("sample plan file must be a JSON object of category -> [ids]")
    entries = []
    for category, ids in raw.items():
        if not isinstance(ids, list) or not ids:
            raise ContractError(f"plan category {category!r} must list at least one id")
        for dataset_id in ids:
            rec = catalog.get(dataset_id)
            if not rec.is_complete():
                raise ContractError(
                    f"plan dataset {dataset_id!r} has incomplete metadata"
                )
        entries.append((category, tuple(ids)))
    return SamplePlan(tuple(entries))


# --- Source classification -------------------------------------------------


@dataclass(frozen=True)
class SourceCounts:
    same_category: int
    different_category: int
    generated_by_llm: int

    def total(self) -> int:
        return self.same_category + self.different_category + self.generated_by_llm

    def to_dict(self) -> dict:
        return {
            "same_category": self.same_category,
            "different_category": self.different_category,
            "generated_by_llm": self.generated_by_llm,
        }


def classify_sources(
    outcome: RecommendationOutcome, sample_category: str, catalog: Catalog
) -> SourceCounts:
    """Three-way origin counts over the outcome's entries.

    Recomputed from resolution status plus `category_match`, so the
    counts cannot drift from the classification rule. Always sums to the
    entry count.
    """
    same = different = generated = 0
    for entry in outcome.entries:
        if entry.resolved_id is None:
            generated += 1
        elif category_match(sample_category, catalog.get(entry.resolved_id)) is SourceClass.SAME_CATEGORY:
            same += 1
        else:
            different += 1
    return SourceCounts(same, different, generated)


# --- Similarity deltas -----------------------------------------------------


@dataclass(frozen=True)
class SimilarityDelta:
    """Mean/std of sample-to-member similarity, before vs after the LLM."""

    group: SourceClass  # SAME_CATEGORY or DIFFERENT_CATEGORY
    metric: str  # "variable" | "description"
    n_before: int
    mean_before: float | None
    std_before: float | None
    n_after: int
    mean_after: float | None
    std_after: float | None

    def to_dict(self) -> dict:
        return {
            "group": self.group.value,
            "metric": self.metric,
            "n_before": self.n_before,
            "mean_before": self.mean_before,
            "std_before": self.std_before,
            "n_after": self.n_after,
            "mean_after": self.mean_after,
            "std_after": self.std_after,
        }


def _mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    """Population mean/std; (None, None) for an empty sequence."""
    if not values:
        return None, None
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def _pair_similarity(
    sample: DatasetMetadata, member: DatasetMetadata, metric: str, index: VectorIndex
) -> float:
    if metric == "variable":
        return dice(sample.variables, member.variables)
    return description_similarity(
        index.vector_for(sample.id), index.vector_for(member.id)
    )


def similarity_deltas(
    sample: DatasetMetadata,
    category: str,
    hits_before: Sequence[RetrievalHit],
    outcome_after: RecommendationOutcome,
    index: VectorIndex,
    catalog: Catalog,
) -> list[SimilarityDelta]:
    """Per (group, metric) mean/std before and after LLM filtering.

    "Before" pools the retrieval hits, "after" the resolved outcome
    entries; unresolved (generated) entries have no metadata to compare
    and are excluded. A group empty on one side gets null means there;
    a group empty on both sides is omitted entirely.
    """
    before_members: dict[SourceClass, list[DatasetMetadata]] = {
        SourceClass.SAME_CATEGORY: [],
        SourceClass.DIFFERENT_CATEGORY: [],
    }
    for hit in hits_before:
        member = catalog.get(hit.dataset_id)
        before_members[category_match(category, member)].append(member)
    after_members: dict[SourceClass, list[DatasetMetadata]] = {
        SourceClass.SAME_CATEGORY: [],
        SourceClass.DIFFERENT_CATEGORY: [],
    }
    for entry in outcome_after.entries:
        if entry.resolved_id is None:
            continue
        member = catalog.get(entry.resolved_id)
        after_members[category_match(category, member)].append(member)

    deltas: list[SimilarityDelta] = []
    for group in (SourceClass.SAME_CATEGORY, SourceClass.DIFFERENT_CATEGORY):
        before = before_members[group]
        after = after_members[group]
        if not before and not after:
            continue
        for metric in ("variable", "description"):
            mean_b, std_b = _mean_std(
                [_pair_similarity(sample, m, metric, index) for m in before]
            )
            mean_a, std_a = _mean_std(
                [_pair_similarity(sample, m, metric, index) for m in after]
            )
            deltas.append(
                SimilarityDelta(
                    group=group, metric=metric,
                    n_before=len(before), mean_before=mean_b, std_before=std_b,
                    n_after=len(after), mean_after=mean_a, std_after=std_a,
                )
            )
    return deltas


# --- Precision / recall / F1 -----------------------------------------------


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float
    n_predicted: int
    n_gold: int
    n_matched: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_predicted": self.n_predicted,
            "n_gold": self.n_gold,
            "n_matched": self.n_matched,
        }


def prf(predicted: Iterable[str], gold: Iterable[str]) -> PrfScore:
    """Set precision/recall/F1 over normalized labels.

    Empty predictions score precision 0; F1 is 0 when precision and
    recall are both 0, else their harmonic mean. Empty gold is a
    contract error.
    """
    pred_set = {k for k in (normalize(p) for p in predicted) if k}
    gold_set = {k for k in (normalize(g) for g in gold) if k}
    if not gold_set:
        raise ContractError("gold label set must be nonempty")
    matched = len(pred_set & gold_set)
    precision = matched / len(pred_set) if pred_set else 0.0
    recall = matched / len(gold_set)
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return PrfScore(precision, recall, f1, len(pred_set), len(gold_set), matched)


# --- Experiment grid -------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    task: TaskKind
    mode: CompositionMode
    provider_id: str
    sample_id: str
    category: str
    status: str  # "ok" | "failed"
    error: str | None = None
    counts: SourceCounts | None = None
    deltas: tuple[SimilarityDelta, ...] | None = None
    prf_baseline: PrfScore | None = None
    prf_llm: PrfScore | None = None

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "mode": self.mode.value,
            "provider_id": self.provider_id,
            "sample_id": self.sample_id,
            "category": self.category,
            "status": self.status,
            "error": self.error,
            "counts": self.counts.to_dict() if self.counts else None,
            "deltas": [d.to_dict() for d in self.deltas] if self.deltas is not None else None,
            "prf_baseline": self.prf_baseline.to_dict() if self.prf_baseline else None,
            "prf_llm": self.prf_llm.to_dict() if self.prf_llm else None,
        }


@dataclass(frozen=True)
class EvalReport:
    provider_id: str
    n: int
    tasks: tuple[TaskKind, ...]
    modes: tuple[CompositionMode, ...]
    cells: tuple[CellResult, ...]

    def failed_cells(self) -> list[CellResult]:
        return [c for c in self.cells if c.status != "ok"]


def run_experiment(
    catalog: Catalog,
    indexes: Mapping[CompositionMode, VectorIndex],
    plan: SamplePlan,
    tasks: Sequence[TaskKind],
    modes: Sequence[CompositionMode],
    provider: EmbeddingProvider,
    llm: LlmClient,
    n: int = 10,
    run_log: RunLog | None = None,
) -> EvalReport:
    """Run every (task, mode, sample) cell and collect per-cell metrics.

    A cell whose LLM stage fails is marked failed and the grid keeps
    going; the report is emitted with the gap recorded.
    """
    pipeline = RagPipeline(catalog, indexes, provider, llm, run_log=run_log)
    cells: list[CellResult] = []
    for task in tasks:
        for mode in modes:
            index = pipeline.indexes.get(mode)
            if index is None:
                raise ContractError(f"no index supplied for mode {mode.value!r}")
            for category, sample_id in plan:
                sample = catalog.get(sample_id)
                base = dict(
                    task=task, mode=mode, provider_id=provider.provider_id,
                    sample_id=sample_id, category=category,
                )
                try:
                    outcome = pipeline.run_task(task, sample, mode, n=n, category=category)
                except PipelineError as exc:
                    cells.append(CellResult(status="failed", error=str(exc), **base))
                    continue
                if isinstance(outcome, RecommendationOutcome):
                    cells.append(
                        CellResult(
                            status="ok",
                            counts=classify_sources(outcome, category, catalog),
                            deltas=tuple(
                                similarity_deltas(
                                    sample, category, outcome.hits, outcome, index, catalog
                                )
                            ),
                            **base,
                        )
                    )
                else:
                    assert isinstance(outcome, EstimationOutcome)
                    gold = sample.tags if task is TaskKind.TAG_ESTIMATION else sample.variables
                    cells.append(
                        CellResult(
                            status="ok",
                            prf_baseline=prf(outcome.candidates, gold),
                            prf_llm=prf(outcome.predicted, gold),
                            **base,
                        )
                    )
    return EvalReport(
        provider_id=provider.provider_id,
        n=n,
        tasks=tuple(tasks),
        modes=tuple(modes),
        cells=tuple(cells),
    )


# --- Aggregation -----------------------------------------------------------


def _pool(stats: list[tuple[int, float, float]]) -> tuple[int, float | None, float | None]:
    """Exactly combine per-cell (n, mean, std) into pooled (n, mean, std)."""
    total = sum(n for n, _, _ in stats)
    if total == 0:
        return 0, None, None
    mean = math.fsum(n * m for n, m, _ in stats) / total
    second_moment = math.fsum(n * (s * s + m * m) for n, m, s in stats) / total
    return total, mean, math.sqrt(max(second_moment - mean * mean, 0.0))


def aggregate_sources(report: EvalReport) -> list[dict]:
    """Summed source counts per (task, mode) for recommendation tasks."""
    rows = []
    for task in report.tasks:
        if task.is_estimation:
            continue
        for mode in report.modes:
            same = different = generated = ok = 0
            for cell in report.cells:
                if cell.task is task and cell.mode is mode and cell.counts is not None:
                    same += cell.counts.same_category
                    different += cell.counts.different_category
                    generated += cell.counts.generated_by_llm
                    ok += 1
            rows.append({
                "task": task.value, "mode": mode.value, "provider_id": report.provider_id,
                "cells_ok": ok, "same_category": same,
                "different_category": different, "generated_by_llm": generated,
            })
    return rows


def aggregate_deltas(report: EvalReport) -> list[dict]:
    """Pooled before/after similarity per (task, mode, group, metric)."""
    rows = []
    for task in report.tasks:
        if task.is_estimation:
            continue
        for mode in report.modes:
            for group in (SourceClass.SAME_CATEGORY, SourceClass.DIFFERENT_CATEGORY):
                for metric in ("variable", "description"):
                    before: list[tuple[int, float, float]] = []
                    after: list[tuple[int, float, float]] = []
                    for cell in report.cells:
                        if cell.task is not task or cell.mode is not mode or not cell.deltas:
                            continue
                        for delta in cell.deltas:
                            if delta.group is group and delta.metric == metric:
                                if delta.mean_before is not None:
                                    before.append((delta.n_before, delta.mean_before, delta.std_before or 0.0))
                                if delta.mean_after is not None:
                                    after.append((delta.n_after, delta.mean_after, delta.std_after or 0.0))
                    n_b, mean_b, std_b = _pool(before)
                    n_a, mean_a, std_a = _pool(after)
                    if n_b == 0 and n_a == 0:
                        continue
                    rows.append({
                        "task": task.value, "mode": mode.value,
                        "provider_id": report.provider_id,
                        "group": group.value, "metric": metric,
                        "n_before": n_b, "mean_before": mean_b, "std_before": std_b,
                        "n_after": n_a, "mean_after": mean_a, "std_after": std_a,
                    })
    return rows


def aggregate_prf(report: EvalReport) -> list[dict]:
    """Mean/std of P/R/F1 over samples, per (task, mode, stage)."""
    rows = []
    for task in report.tasks:
        if not task.is_estimation:
            continue
        for mode in report.modes:
            for stage in ("baseline", "llm"):
                scores = [
                    cell.prf_baseline if stage == "baseline" else cell.prf_llm
                    for cell in report.cells
                    if cell.task is task and cell.mode is mode and cell.status == "ok"
                ]
                scores = [s for s in scores if s is not None]
                if not scores:
                    continue
                row: dict = {
                    "task": task.value, "mode": mode.value,
                    "provider_id": report.provider_id, "stage": stage,
                    "cells_ok": len(scores),
                }
                for field in ("precision", "recall", "f1"):
                    mean, std = _mean_std([getattr(s, field) for s in scores])
                    row[f"mean_{field}"] = mean
                    row[f"std_{field}"] = std
                rows.append(row)
    return rows


# --- Report files ----------------------------------------------------------


def _fmt(value: object) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Emit report.jsonl, summary.txt, and the plot-ready CSVs.

    Output contains no timestamps, so identical runs produce identical
    bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig_dir = out / "figures"
    fig_dir.mkdir(exist_ok=True)
    written: list[Path] = []

    cells_path = out / "report.jsonl"
    with open(cells_path, "w", encoding="utf-8") as fp:
        for cell in report.cells:
            fp.write(json.dumps(cell.to_dict(), sort_keys=True) + "\n")
    written.append(cells_path)

    sources = aggregate_sources(report)
    deltas = aggregate_deltas(report)
    prf_rows = aggregate_prf(report)

    summary_path = out / "summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fp:
        fp.write(f"provider: {report.provider_id}   n: {report.n}   cells: {len(report.cells)}"
                 f"   failed: {len(report.failed_cells())}\n")
        if sources:
            fp.write("\nRecommendation sources (entries per origin, summed over samples)\n")
            fp.write(f"{'task':<12}{'mode':<6}{'same':>6}{'diff':>6}{'genLLM':>8}{'cells':>7}\n")
            for row in sources:
                fp.write(
                    f"{row['task']:<12}{row['mode']:<6}{row['same_category']:>6}"
                    f"{row['different_category']:>6}{row['generated_by_llm']:>8}"
                    f"{row['cells_ok']:>7}\n"
                )
        if deltas:
            fp.write("\nSimilarity before/after LLM filtering (pooled over samples)\n")
            fp.write(
                f"{'task':<12}{'mode':<6}{'group':<20}{'metric':<13}"
                f"{'n_b':>5}{'mean_b':>10}{'std_b':>10}{'n_a':>5}{'mean_a':>10}{'std_a':>10}\n"
            )
            for row in deltas:
                fp.write(
                    f"{row['task']:<12}{row['mode']:<6}{row['group']:<20}{row['metric']:<13}"
                    f"{row['n_before']:>5}{_fmt(row['mean_before']):>10}{_fmt(row['std_before']):>10}"
                    f"{row['n_after']:>5}{_fmt(row['mean_after']):>10}{_fmt(row['std_after']):>10}\n"
                )
        if prf_rows:
            fp.write("\nEstimation scores (mean over samples)\n")
            fp.write(
                f"{'task':<12}{'mode':<6}{'stage':<10}{'cells':>6}"
                f"{'P':>10}{'R':>10}{'F1':>10}{'F1 std':>10}\n"
            )
            for row in prf_rows:
                fp.write(
                    f"{row['task']:<12}{row['mode']:<6}{row['stage']:<10}{row['cells_ok']:>6}"
                    f"{_fmt(row['mean_precision']):>10}{_fmt(row['mean_recall']):>10}"
                    f"{_fmt(row['mean_f1']):>10}{_fmt(row['std_f1']):>10}\n"
                )
        failed = report.failed_cells()
        if failed:
            fp.write("\nFailed cells\n")
            for cell in failed:
                fp.write(f"  {cell.task.value}/{cell.mode.value}/{cell.sample_id}: {cell.error}\n")
    written.append(summary_path)

    written.append(_write_csv(fig_dir / "sources.csv", sources, [
        "task", "mode", "provider_id", "cells_ok",
        "same_category", "different_category", "generated_by_llm",
    ]))
    written.append(_write_csv(fig_dir / "similarity_deltas.csv", deltas, [
        "task", "mode", "provider_id", "group", "metric",
        "n_before", "mean_before", "std_before", "n_after", "mean_after", "std_after",
    ]))
    written.append(_write_csv(fig_dir / "estimation_scores.csv", prf_rows, [
        "task", "mode", "provider_id", "stage", "cells_ok",
        "mean_precision", "std_precision", "mean_recall", "std_recall",
        "mean_f1", "std_f1",
    ]))
    return written


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row.get(c) for c in columns])
    return path
