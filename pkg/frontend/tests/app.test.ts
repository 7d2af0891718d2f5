import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ExplorerApp } from "../src/main";
import type { QueryResponse } from "../src/types";

const META = {
  id: "x1",
  name: "Example Dataset One",
  summary: "a summary",
  variables: ["a", "b"],
  tags: ["health"],
  source_url: null,
};

function queryResponse(overrides: Partial<QueryResponse> = {}): QueryResponse {
  return {
    task: "similar",
    dataset_id: "x1",
    mode: "dv",
    n: 10,
    use_llm: false,
    query_category: "health",
    hits: [
      { dataset_id: "y2", name: "Other Dataset Two", rank: 1, score: 0.7,
        source: "same_category", dice: 0.5, description_similarity: 0.6 },
    ],
    recommendation: null,
    estimation: null,
    ...overrides,
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

let root: HTMLElement;

beforeEach(() => {
  root = document.createElement("div");
  document.body.appendChild(root);
  window.history.replaceState(null, "", "/");
});

afterEach(() => {
  root.remove();
  vi.unstubAllGlobals();
});

describe("boot", () => {
  it("shows a hint when no dataset is selected", async () => {
    vi.stubGlobal("fetch", vi.fn());
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    expect(root.querySelector(".notice-banner")?.textContent).toContain("search for a dataset");
    expect(fetch).not.toHaveBeenCalled();
  });

  it("restores a deep-linked view from URL parameters", async () => {
    window.history.replaceState(null, "", "/?dataset=x1&task=combinable&mode=v&n=4&llm=0");
    vi.stubGlobal("fetch", vi.fn(async (url: RequestInfo | URL) => {
      if (String(url).includes("/v1/datasets/")) return jsonResponse(META);
      return jsonResponse(queryResponse({ task: "combinable", mode: "v", n: 4 }));
    }));
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    expect(app.currentState).toEqual({
      datasetId: "x1", task: "combinable", mode: "v", n: 4, useLlm: false,
    });
    const call = vi.mocked(fetch).mock.calls.find(([u]) => String(u).endsWith("/v1/query"))!;
    expect(JSON.parse(String(call[1]!.body))).toEqual({
      task: "combinable", dataset_id: "x1", mode: "v", n: 4, use_llm: false,
    });
    expect(root.querySelector(".result-name")?.textContent).toBe("Other Dataset Two");
  });
});

describe("navigation", () => {
  it("pushes state to the URL and re-queries on control changes", async () => {
    vi.stubGlobal("fetch", vi.fn(async (url: RequestInfo | URL) => {
      if (String(url).includes("/v1/datasets/")) return jsonResponse(META);
      return jsonResponse(queryResponse());
    }));
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    await app.navigate({ datasetId: "x1" });
    const queriesAfterSelect = vi.mocked(fetch).mock.calls.length;
    expect(window.location.search).toContain("dataset=x1");

    const modeSelect = root.querySelector<HTMLSelectElement>("#mode-select")!;
    modeSelect.value = "v";
    modeSelect.dispatchEvent(new Event("change"));
    await app.whenIdle();
    expect(app.currentState.mode).toBe("v");
    expect(window.location.search).toContain("mode=v");
    expect(vi.mocked(fetch).mock.calls.length).toBeGreaterThan(queriesAfterSelect);
  });

  it("aborts the superseded in-flight query", async () => {
    const aborted: boolean[] = [];
    let call = 0;
    vi.stubGlobal("fetch", vi.fn((url: RequestInfo | URL, init?: RequestInit) => {
      call += 1;
      if (call <= 2) {
        // first navigation's pair of requests: hang until aborted
        return new Promise((_, reject) => {
          init!.signal!.addEventListener("abort", () => {
            aborted.push(true);
            reject(new DOMException("Aborted", "AbortError"));
          });
        });
      }
      if (String(url).includes("/v1/datasets/")) return Promise.resolve(jsonResponse(META));
      return Promise.resolve(jsonResponse(queryResponse()));
    }));
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    const first = app.navigate({ datasetId: "x1" });
    const second = app.navigate({ datasetId: "x1", mode: "d" });
    await Promise.all([first, second]);
    expect(aborted.length).toBeGreaterThan(0);
    expect(root.querySelector(".result-name")?.textContent).toBe("Other Dataset Two");
  });
});

describe("LLM failure", () => {
  it("renders the retrieval-only partial with an inline retry", async () => {
    const partial = queryResponse({ use_llm: true });
    vi.stubGlobal("fetch", vi.fn(async (url: RequestInfo | URL) => {
      if (String(url).includes("/v1/datasets/")) return jsonResponse(META);
      return jsonResponse(
        { error: "llm_unavailable", message: "chat endpoint unreachable", partial },
        502,
      );
    }));
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    await app.navigate({ datasetId: "x1", useLlm: true });
    expect(root.querySelector(".result-name")?.textContent).toBe("Other Dataset Two");
    const banner = root.querySelector(".error-banner");
    expect(banner?.textContent).toContain("LLM unavailable");
    expect(banner?.querySelector(".retry-button")).not.toBeNull();
  });

  it("retry re-issues the query", async () => {
    let failures = 1;
    vi.stubGlobal("fetch", vi.fn(async (url: RequestInfo | URL) => {
      if (String(url).includes("/v1/datasets/")) return jsonResponse(META);
      if (failures > 0) {
        failures -= 1;
        return jsonResponse({ error: "llm_unavailable", message: "down", partial: null }, 502);
      }
      return jsonResponse(queryResponse({ use_llm: true }));
    }));
    const app = new ExplorerApp(root, { apiBase: "http://svc" }).mount();
    await app.boot();
    await app.navigate({ datasetId: "x1", useLlm: true });
    expect(root.querySelector(".error-banner")).not.toBeNull();
    root.querySelector<HTMLButtonElement>(".retry-button")!.click();
    await app.whenIdle();
    expect(root.querySelector(".error-banner")).toBeNull();
    expect(root.querySelector(".result-name")?.textContent).toBe("Other Dataset Two");
  });
});
