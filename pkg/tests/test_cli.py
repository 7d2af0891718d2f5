"""Command-line interface: commands, exit codes, determinism."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from datascout.fixtures import corpus_path, hdx_slice_path

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "datascout.cli", *args],
        capture_output=True, text=True, **kwargs,
    )


def test_ingest_native(tmp_path):
    out = tmp_path / "catalog.jsonl"
    result = run_cli("ingest", "--input", str(corpus_path()), "--output", str(out))
    assert result.returncode == EXIT_OK, result.stderr
    assert out.exists()
    assert len(out.read_text().splitlines()) == 50


def test_ingest_hdx_format(tmp_path):
    out = tmp_path / "catalog.jsonl"
    result = run_cli("ingest", "--input", str(hdx_slice_path()), "--output", str(out),
                     "--format", "hdx")
    assert result.returncode == EXIT_OK, result.stderr
    assert len(out.read_text().splitlines()) == 100
    rec = json.loads(out.read_text().splitlines()[0])
    assert set(rec) >= {"id", "name", "summary", "variables", "tags"}


def test_ingest_reports_rejects_with_partial_exit(tmp_path):
    src = tmp_path / "bad.jsonl"
    src.write_text('{"name": "Good Record One", "variables": ["v"], "tags": ["t"]}\n'
                   "{broken\n")
    out = tmp_path / "catalog.jsonl"
    result = run_cli("ingest", "--input", str(src), "--output", str(out))
    assert result.returncode == EXIT_PARTIAL
    assert "error" in result.stderr
    assert len(out.read_text().splitlines()) == 1


def test_index_deterministic(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for out in (a, b):
        result = run_cli("index", "--catalog", "fixture", "--mode", "dv",
                         "--out", str(out))
        assert result.returncode == EXIT_OK, result.stderr
    assert a.read_bytes() == b.read_bytes()


def test_query_against_prebuilt_index(tmp_path):
    index_path = tmp_path / "dv.jsonl"
    run_cli("index", "--catalog", "fixture", "--mode", "dv", "--out", str(index_path))
    result = run_cli("query", "--catalog", "fixture", "--dataset", "weather-01",
                     "--mode", "dv", "--index", str(index_path), "--n", "5", "--json")
    assert result.returncode == EXIT_OK, result.stderr
    lines = [json.loads(l) for l in result.stdout.splitlines()]
    assert len(lines) == 5
    assert all(l["kind"] == "hit" for l in lines)
    assert [l["rank"] for l in lines] == [1, 2, 3, 4, 5]


def test_query_unknown_dataset_exits_nonzero():
    result = run_cli("query", "--catalog", "fixture", "--dataset", "no-such-id")
    assert result.returncode == EXIT_ERROR
    assert "no-such-id" in result.stderr


def test_missing_catalog_file_is_usage_error():
    result = run_cli("query", "--catalog", "/nonexistent/catalog.jsonl",
                     "--dataset", "x")
    assert result.returncode == EXIT_ERROR
    assert result.stderr.strip()
    assert "Traceback" not in result.stderr


def test_unconfigured_remote_provider_is_usage_error(tmp_path):
    import os

    env = {k: v for k, v in os.environ.items() if k != "EMBED_API_BASE"}
    result = run_cli("index", "--catalog", "fixture", "--mode", "d",
                     "--provider", "remote:some-model", "--out", str(tmp_path / "i.jsonl"),
                     env=env)
    assert result.returncode == EXIT_ERROR
    assert "EMBED_API_BASE" in result.stderr
    assert "Traceback" not in result.stderr


def test_query_with_llm_human_readable():
    result = run_cli("query", "--catalog", "fixture", "--dataset", "econ-01",
                     "--use-llm", "--llm", "sim")
    assert result.returncode == EXIT_OK, result.stderr
    assert "after llm filtering" in result.stdout


def test_evaluate_scripted_miss_is_partial(tmp_path):
    script = tmp_path / "empty.json"
    script.write_text("{}")
    result = run_cli("evaluate", "--catalog", "fixture", "--tasks", "1",
                     "--modes", "d", "--llm", f"scripted:{script}",
                     "--out", str(tmp_path / "rep"))
    assert result.returncode == EXIT_PARTIAL
    report = (tmp_path / "rep" / "report.jsonl").read_text().splitlines()
    assert all(json.loads(l)["status"] == "failed" for l in report)


def test_evaluate_writes_report_tree(tmp_path):
    out = tmp_path / "rep"
    result = run_cli("evaluate", "--catalog", "fixture", "--tasks", "1,3",
                     "--modes", "d", "--llm", "sim", "--out", str(out))
    assert result.returncode == EXIT_OK, result.stderr
    for name in ("report.jsonl", "summary.txt", "run_log.jsonl",
                 "figures/sources.csv", "figures/similarity_deltas.csv",
                 "figures/estimation_scores.csv"):
        assert (out / name).exists(), name
    assert len((out / "report.jsonl").read_text().splitlines()) == 20


def test_evaluate_respects_sample_override(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"economics": ["econ-01"]}))
    out = tmp_path / "rep"
    result = run_cli("evaluate", "--catalog", "fixture", "--tasks", "4",
                     "--modes", "v", "--llm", "sim", "--samples", str(plan),
                     "--out", str(out))
    assert result.returncode == EXIT_OK, result.stderr
    cells = [json.loads(l) for l in (out / "report.jsonl").read_text().splitlines()]
    assert len(cells) == 1
    assert cells[0]["sample_id"] == "econ-01"


def test_evaluate_config_file_fills_defaults(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"tasks": "1", "modes": "d"}))
    out = tmp_path / "rep"
    result = run_cli("evaluate", "--catalog", "fixture", "--llm", "sim",
                     "--config", str(config), "--out", str(out))
    assert result.returncode == EXIT_OK, result.stderr
    cells = [json.loads(l) for l in (out / "report.jsonl").read_text().splitlines()]
    assert {c["task"] for c in cells} == {"similar"}
    assert {c["mode"] for c in cells} == {"d"}


def test_flag_overrides_config(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"tasks": "1,2,3,4"}))
    out = tmp_path / "rep"
    result = run_cli("evaluate", "--catalog", "fixture", "--llm", "sim",
                     "--tasks", "3", "--modes", "d",
                     "--config", str(config), "--out", str(out))
    assert result.returncode == EXIT_OK, result.stderr
    cells = [json.loads(l) for l in (out / "report.jsonl").read_text().splitlines()]
    assert {c["task"] for c in cells} == {"tags"}
