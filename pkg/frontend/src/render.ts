// DOM builders. Pure functions from response data to elements; all
// numbers come straight from the service (raw values kept in data-*
// attributes, display text merely formatted).

import type { DatasetDetail, Hit, QueryResponse, RecommendationEntry, SourceClass } from "./types";

const BADGE_LABEL: Record<SourceClass, string> = {
  same_category: "same category",
  different_category: "different category",
  generated_by_llm: "generated by LLM",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function badge(source: SourceClass): HTMLElement {
  return el("span", `badge badge-${source}`, BADGE_LABEL[source]);
}

export function similarityBar(label: string, value: number | null): HTMLElement {
  const wrap = el("div", "bar-row");
  wrap.appendChild(el("span", "bar-label", label));
  const track = el("div", "bar-track");
  if (value !== null) {
    const fill = el("div", "bar-fill");
    // cosine can be negative; clamp the drawn width, never the number
    fill.style.width = `${Math.max(0, Math.min(1, value)) * 100}%`;
    track.appendChild(fill);
    wrap.appendChild(track);
    const num = el("span", "bar-value", value.toFixed(4));
    num.dataset.rawValue = String(value);
    wrap.appendChild(num);
  } else {
    wrap.appendChild(track);
    wrap.appendChild(el("span", "bar-value bar-missing", "n/a"));
  }
  return wrap;
}

export interface ResultRowData {
  rank: number;
  name: string;
  datasetId: string | null;
  source: SourceClass;
  score: number | null;
  dice: number | null;
  descriptionSimilarity: number | null;
}

export function hitToRow(hit: Hit): ResultRowData {
  return {
    rank: hit.rank,
    name: hit.name,
    datasetId: hit.dataset_id,
    source: hit.source,
    score: hit.score,
    dice: hit.dice,
    descriptionSimilarity: hit.description_similarity,
  };
}

export function entryToRow(entry: RecommendationEntry, rank: number): ResultRowData {
  return {
    rank,
    name: entry.resolved_name ?? entry.raw_name,
    datasetId: entry.resolved_id,
    source: entry.source,
    score: null,
    dice: entry.dice,
    descriptionSimilarity: entry.description_similarity,
  };
}

export function renderResultRow(row: ResultRowData, onPivot: (id: string) => void): HTMLElement {
  const item = el("li", `result-row source-${row.source}`);
  item.dataset.datasetId = row.datasetId ?? "";
  item.dataset.rank = String(row.rank);
  if (row.score !== null) item.dataset.score = String(row.score);

  const head = el("div", "result-head");
  head.appendChild(el("span", "result-rank", `${row.rank}.`));
  head.appendChild(el("span", "result-name", row.name));
  head.appendChild(badge(row.source));
  if (row.datasetId !== null) {
    const pivot = el("button", "pivot-button", "explore from here");
    pivot.type = "button";
    pivot.addEventListener("click", () => onPivot(row.datasetId!));
    head.appendChild(pivot);
  }
  item.appendChild(head);

  const bars = el("div", "result-bars");
  if (row.score !== null) bars.appendChild(similarityBar("retrieval score", row.score));
  bars.appendChild(similarityBar("variable (Dice)", row.dice));
  bars.appendChild(similarityBar("description (cosine)", row.descriptionSimilarity));
  item.appendChild(bars);
  return item;
}

export function renderResults(
  response: QueryResponse,
  onPivot: (id: string) => void,
): HTMLElement {
  const container = el("section", "results");

  if (response.estimation) {
    const est = el("div", "estimation");
    est.appendChild(el("h3", undefined, `predicted ${response.task}`));
    const predicted = el("ol", "predicted-list");
    for (const label of response.estimation.predicted) {
      predicted.appendChild(el("li", "predicted-label", label));
    }
    est.appendChild(predicted);
    est.appendChild(
      el("p", "muted", `${response.estimation.candidates.length} candidate labels offered`),
    );
    container.appendChild(est);
    return container;
  }

  const rows: ResultRowData[] = response.recommendation
    ? response.recommendation.entries.map((entry, i) => entryToRow(entry, i + 1))
    : response.hits.map(hitToRow);

  const heading = response.recommendation
    ? "LLM-filtered recommendations"
    : "retrieved by vector similarity";
  container.appendChild(el("h3", undefined, heading));
  const list = el("ol", "result-list");
  for (const row of rows) list.appendChild(renderResultRow(row, onPivot));
  container.appendChild(list);
  if (rows.length === 0) container.appendChild(el("p", "muted", "no results"));
  return container;
}

export function renderDatasetCard(meta: DatasetDetail): HTMLElement {
  const card = el("article", "dataset-card");
  card.appendChild(el("h2", undefined, meta.name));
  if (meta.summary) card.appendChild(el("p", "dataset-summary", meta.summary));
  const facts = el("dl", "dataset-facts");
  const fact = (label: string, value: string) => {
    facts.appendChild(el("dt", undefined, label));
    facts.appendChild(el("dd", undefined, value));
  };
  fact("id", meta.id);
  fact("variables", meta.variables.join(", ") || "(none)");
  fact("tags", meta.tags.join(", ") || "(none)");
  card.appendChild(facts);
  return card;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", "error-message", message));
  const retry = el("button", "retry-button", "retry");
  retry.type = "button";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

export function renderNotice(message: string): HTMLElement {
  return el("div", "notice-banner", message);
}
