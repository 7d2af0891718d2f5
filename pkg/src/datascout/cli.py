"""Operator command line: ingest, index, query, evaluate, serve.

Exit codes: 0 success, 1 usage or contract error, 2 partial failure
(some records or cells failed but output was produced). Configuration
precedence is flags > environment > config file (--config).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures
from .catalog import Catalog, ingest, write_catalog
from .embedding import (
    CompositionMode,
    EmbeddingProvider,
    FileEmbeddingProvider,
    HashEmbeddingProvider,
    RemoteEmbeddingProvider,
)
from .errors import DataScoutError
from .evaluation import (
    DEFAULT_CATEGORIES,
    load_sample_plan,
    run_experiment,
    select_samples,
    write_report,
)
from .hdx import hdx_record_to_native
from .pipeline import (
    LlmClient,
    RagPipeline,
    RemoteLlmClient,
    RunLog,
    ScriptedLlmClient,
    TaskKind,
    simulated_llm_client,
)
from .similarity import description_similarity, dice
from .vector_store import build_index, load as load_index, save as save_index

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2


def _apply_config(ctx: click.Context, config: str | None) -> None:
    """Fill in parameters still at their defaults from a JSON config file."""
    if not config:
        return
    values = json.loads(Path(config).read_text(encoding="utf-8"))
    if not isinstance(values, dict):
        raise click.ClickException("--config file must contain a JSON object")
    for key, value in values.items():
        param = key.replace("-", "_")
        if param in ctx.params and ctx.get_parameter_source(param) == click.core.ParameterSource.DEFAULT:
            ctx.params[param] = value


def _load_catalog(path: str) -> Catalog:
    resolved = fixtures.corpus_path() if path == "fixture" else Path(path)
    result = ingest(resolved)
    if result.errors:
        for issue in result.errors:
            click.echo(f"error: {issue}", err=True)
        raise click.ClickException(f"catalog {path} has {len(result.errors)} bad record(s)")
    return result.catalog


def _make_provider(selector: str, dimension: int, seed: int) -> EmbeddingProvider:
    if selector == "hash":
        return HashEmbeddingProvider(dimension=dimension, seed=seed)
    if selector.startswith("file:"):
        return FileEmbeddingProvider(selector.split(":", 1)[1])
    if selector.startswith("remote:"):
        return RemoteEmbeddingProvider(model_id=selector.split(":", 1)[1], dimension=dimension)
    raise click.ClickException(
        f"unknown provider {selector!r} (expected hash, file:PATH, or remote:MODEL)"
    )


def _make_llm(selector: str) -> LlmClient:
    if selector == "sim":
        return simulated_llm_client()
    if selector.startswith("scripted:"):
        path = selector.split(":", 1)[1]
        responses = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScriptedLlmClient(responses)
    if selector == "remote":
        return RemoteLlmClient()
    raise click.ClickException(
        f"unknown llm {selector!r} (expected sim, scripted:PATH, or remote)"
    )


def _parse_modes(text: str) -> list[CompositionMode]:
    return [CompositionMode.parse(m) for m in text.split(",") if m.strip()]


def _parse_tasks(text: str) -> list[TaskKind]:
    return [TaskKind.parse(t) for t in text.split(",") if t.strip()]


@click.group()
def main() -> None:
    """Metadata-based dataset exploration engine."""


@main.command("ingest")
@click.option("--input", "input_path", required=True, help="Source metadata file (line-delimited).")
@click.option("--output", "output_path", required=True, help="Normalized catalog file to write.")
@click.option("--format", "fmt", type=click.Choice(["native", "hdx"]), default="native",
              show_default=True, help="Source record shape.")
def ingest_cmd(input_path: str, output_path: str, fmt: str) -> None:
    """Validate and normalize metadata records into a catalog file."""
    adapter = hdx_record_to_native if fmt == "hdx" else None
    result = ingest(Path(input_path), adapter=adapter)
    for issue in result.errors:
        click.echo(f"error: {issue}", err=True)
    for issue in result.warnings:
        click.echo(f"warning: {issue}", err=True)
    write_catalog(result.catalog, output_path)
    click.echo(
        f"ingested {len(result.catalog)} record(s) "
        f"({len(result.warnings)} warning(s), {len(result.errors)} rejected) -> {output_path}"
    )
    if result.errors:
        sys.exit(EXIT_PARTIAL)


@main.command("index")
@click.option("--catalog", "catalog_path", required=True,
              help="Catalog file, or 'fixture' for the bundled corpus.")
@click.option("--mode", required=True, help="Composition mode: d, v, or dv.")
@click.option("--provider", default="hash", show_default=True,
              help="hash | file:PATH | remote:MODEL")
@click.option("--dimension", default=64, show_default=True, help="Vector size (hash/remote).")
@click.option("--seed", default=7, show_default=True, envvar="SCOUT_SEED")
@click.option("--out", "out_path", required=True, help="Index file to write.")
def index_cmd(catalog_path: str, mode: str, provider: str, dimension: int, seed: int,
              out_path: str) -> None:
    """Embed every catalog record and write a vector index file."""
    catalog = _load_catalog(catalog_path)
    prov = _make_provider(provider, dimension, seed)
    index = build_index(catalog, CompositionMode.parse(mode), prov)
    save_index(index, out_path)
    click.echo(f"indexed {len(index)} vectors ({prov.provider_id}, mode {mode}) -> {out_path}")


@main.command("query")
@click.option("--catalog", "catalog_path", required=True)
@click.option("--task", default="similar", show_default=True)
@click.option("--dataset", "dataset_id", required=True)
@click.option("--mode", default="dv", show_default=True)
@click.option("--n", default=10, show_default=True)
@click.option("--provider", default="hash", show_default=True)
@click.option("--dimension", default=64, show_default=True)
@click.option("--seed", default=7, show_default=True, envvar="SCOUT_SEED")
@click.option("--index", "index_path", default=None,
              help="Prebuilt index file; built in memory when omitted.")
@click.option("--use-llm/--no-llm", default=False, show_default=True)
@click.option("--llm", default="sim", show_default=True, help="sim | scripted:PATH | remote")
@click.option("--json", "as_json", is_flag=True, help="One machine-readable record per line.")
def query_cmd(catalog_path: str, task: str, dataset_id: str, mode: str, n: int,
              provider: str, dimension: int, seed: int, index_path: str | None,
              use_llm: bool, llm: str, as_json: bool) -> None:
    """Run one exploration query and print the ranked results."""
    catalog = _load_catalog(catalog_path)
    if dataset_id not in catalog:
        raise click.ClickException(f"unknown dataset id: {dataset_id}")
    task_kind = TaskKind.parse(task)
    mode_kind = CompositionMode.parse(mode)
    prov = _make_provider(provider, dimension, seed)
    index = load_index(index_path) if index_path else build_index(catalog, mode_kind, prov)
    pipeline = RagPipeline(catalog, {mode_kind: index},
                           prov, _make_llm(llm) if use_llm else None)
    sample = catalog.get(dataset_id)

    if use_llm:
        outcome = pipeline.run_task(task_kind, sample, mode_kind, n=n)
        hits = outcome.hits
    else:
        outcome = None
        hits = tuple(pipeline.retrieve(sample, mode_kind, n, task=task_kind))

    if as_json:
        for hit in hits:
            click.echo(json.dumps({
                "kind": "hit", "rank": hit.rank, "dataset_id": hit.dataset_id,
                "name": catalog.get(hit.dataset_id).name, "score": hit.score,
            }, sort_keys=True))
    else:
        click.echo(f"retrieved for {sample.name!r} (task {task_kind.value}, mode {mode_kind.value}):")
        for hit in hits:
            click.echo(f"  {hit.rank:>2}. {hit.score:+.4f}  {catalog.get(hit.dataset_id).name}"
                       f"  [{hit.dataset_id}]")
    if outcome is None:
        return
    if task_kind.is_estimation:
        rows = [{"kind": "predicted", "rank": i, "label": label}
                for i, label in enumerate(outcome.predicted, 1)]
        if as_json:
            for row in rows:
                click.echo(json.dumps(row, sort_keys=True))
        else:
            click.echo("predicted labels:")
            for row in rows:
                click.echo(f"  {row['rank']:>2}. {row['label']}")
    else:
        if as_json:
            for i, entry in enumerate(outcome.entries, 1):
                click.echo(json.dumps({
                    "kind": "entry", "rank": i, "raw_name": entry.raw_name,
                    "resolved_id": entry.resolved_id, "source": entry.source.value,
                    "dice": dice(sample.variables, catalog.get(entry.resolved_id).variables)
                    if entry.resolved_id else None,
                }, sort_keys=True))
        else:
            click.echo("after llm filtering:")
            for i, entry in enumerate(outcome.entries, 1):
                mark = entry.source.value
                click.echo(f"  {i:>2}. {entry.raw_name}  [{mark}]")


@main.command("evaluate")
@click.option("--catalog", "catalog_path", required=True)
@click.option("--tasks", default="1,2,3,4", show_default=True)
@click.option("--modes", default="d,v,dv", show_default=True)
@click.option("--provider", default="hash", show_default=True)
@click.option("--dimension", default=64, show_default=True)
@click.option("--seed", default=7, show_default=True, envvar="SCOUT_SEED")
@click.option("--llm", default="sim", show_default=True)
@click.option("--n", default=10, show_default=True)
@click.option("--categories", default=",".join(DEFAULT_CATEGORIES), show_default=False,
              help="Comma-separated sample categories.")
@click.option("--per-category", default=2, show_default=True)
@click.option("--samples", "samples_path", default=None,
              help="Explicit category->ids JSON plan; overrides seeded selection.")
@click.option("--out", "out_dir", required=True, help="Report directory.")
@click.option("--config", default=None, envvar="SCOUT_CONFIG", help="JSON config file.")
@click.pass_context
def evaluate_cmd(ctx: click.Context, **_kwargs) -> None:
    """Run the task grid over sample datasets and write report files."""
    _apply_config(ctx, ctx.params.pop("config"))
    p = ctx.params
    catalog = _load_catalog(p["catalog_path"])
    tasks = _parse_tasks(p["tasks"])
    modes = _parse_modes(p["modes"])
    prov = _make_provider(p["provider"], p["dimension"], p["seed"])
    llm_client = _make_llm(p["llm"])
    if p["samples_path"]:
        plan = load_sample_plan(p["samples_path"], catalog)
    else:
        categories = [c.strip() for c in p["categories"].split(",") if c.strip()]
        plan = select_samples(catalog, categories, p["per_category"], seed=p["seed"])
    indexes = {mode: build_index(catalog, mode, prov) for mode in modes}
    out_dir = Path(p["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    with RunLog(out_dir / "run_log.jsonl") as run_log:
        report = run_experiment(
            catalog, indexes, plan, tasks, modes, prov, llm_client,
            n=p["n"], run_log=run_log,
        )
    written = write_report(report, out_dir)
    for path in written:
        click.echo(f"wrote {path}")
    failed = report.failed_cells()
    click.echo(f"{len(report.cells)} cell(s), {len(failed)} failed")
    if failed:
        sys.exit(EXIT_PARTIAL)


@main.command("serve")
@click.option("--catalog", "catalog_path", required=True)
@click.option("--modes", default="d,v,dv", show_default=True)
@click.option("--provider", default="hash", show_default=True)
@click.option("--dimension", default=64, show_default=True)
@click.option("--seed", default=7, show_default=True, envvar="SCOUT_SEED")
@click.option("--llm", default="sim", show_default=True)
@click.option("--addr", default="127.0.0.1:8765", show_default=True, envvar="SCOUT_ADDR")
@click.option("--cors-origin", default="*", show_default=True, envvar="SCOUT_CORS_ORIGIN")
def serve_cmd(catalog_path: str, modes: str, provider: str, dimension: int, seed: int,
              llm: str, addr: str, cors_origin: str) -> None:
    """Serve the query API over HTTP until interrupted."""
    import uvicorn

    from .service import create_app

    catalog = _load_catalog(catalog_path)
    prov = _make_provider(provider, dimension, seed)
    indexes = {mode: build_index(catalog, mode, prov) for mode in _parse_modes(modes)}
    app = create_app(catalog, indexes, prov, _make_llm(llm), cors_origins=[cors_origin])
    host, _, port = addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")


def run() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except click.Abort:
        sys.exit(EXIT_ERROR)
    except (DataScoutError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


if __name__ == "__main__":
    run()
