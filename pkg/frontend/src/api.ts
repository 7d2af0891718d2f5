// Thin fetch client for the query service. One request in flight per
// caller-supplied AbortSignal; a 502 from the LLM stage still surfaces
// the retrieval-only partial result.

import type { DatasetDetail, QueryResponse, SearchResponse } from "./types";
import type { ExplorationState } from "./state";

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly partial: QueryResponse | null = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export function resolveApiBase(win: Window = window): string {
  const injected = (win as Window & { __SCOUT_API__?: string }).__SCOUT_API__;
  const fromUrl = new URLSearchParams(win.location.search).get("api");
  return (fromUrl ?? injected ?? "http://127.0.0.1:8765").replace(/\/$/, "");
}

export class ApiClient {
  constructor(private readonly base: string) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await fetch(`${this.base}${path}`, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ServiceError(`service unreachable: ${String(err)}`, 0);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const detail = body as { message?: string; partial?: QueryResponse; detail?: unknown } | null;
      const message =
        detail?.message ?? (detail?.detail ? JSON.stringify(detail.detail) : response.statusText);
      throw new ServiceError(message, response.status, detail?.partial ?? null);
    }
    return body;
  }

  search(query: string, signal?: AbortSignal): Promise<SearchResponse> {
    const q = encodeURIComponent(query);
    return this.request(`/v1/datasets?query=${q}&limit=20`, { signal }) as Promise<SearchResponse>;
  }

  dataset(id: string, signal?: AbortSignal): Promise<DatasetDetail> {
    return this.request(`/v1/datasets/${encodeURIComponent(id)}`, { signal }) as Promise<DatasetDetail>;
  }

  query(state: ExplorationState, signal?: AbortSignal): Promise<QueryResponse> {
    if (!state.datasetId) throw new Error("no dataset selected");
    return this.request("/v1/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        task: state.task,
        dataset_id: state.datasetId,
        mode: state.mode,
        n: state.n,
        use_llm: state.useLlm,
      }),
      signal,
    }) as Promise<QueryResponse>;
  }
}
