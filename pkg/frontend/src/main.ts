// Controller: wires search, controls, results, pivot navigation, and
// URL history together. One query in flight at a time; a new navigation
// aborts the previous request. All state needed to reproduce a view
// lives in the URL.

import { ApiClient, ServiceError, resolveApiBase } from "./api";
import {
  DEFAULT_STATE,
  MODES,
  TASKS,
  stateFromParams,
  stateToParams,
  statesEqual,
  type ExplorationState,
} from "./state";
import {
  renderDatasetCard,
  renderError,
  renderNotice,
  renderResults,
} from "./render";
import type { DatasetSummary, QueryResponse } from "./types";

export interface AppOptions {
  apiBase?: string;
  win?: Window;
}

export class ExplorerApp {
  readonly api: ApiClient;
  private readonly win: Window;
  private state: ExplorationState = { ...DEFAULT_STATE };
  private queryAbort: AbortController | null = null;
  private searchAbort: AbortController | null = null;
  private inflight: Promise<void> = Promise.resolve();

  private searchInput!: HTMLInputElement;
  private searchResults!: HTMLUListElement;
  private taskSelect!: HTMLSelectElement;
  private modeSelect!: HTMLSelectElement;
  private nInput!: HTMLInputElement;
  private llmToggle!: HTMLInputElement;
  private statusBox!: HTMLElement;
  private datasetBox!: HTMLElement;
  private resultsBox!: HTMLElement;

  constructor(private readonly root: HTMLElement, options: AppOptions = {}) {
    this.win = options.win ?? window;
    this.api = new ApiClient(options.apiBase ?? resolveApiBase(this.win));
  }

  get currentState(): ExplorationState {
    return { ...this.state };
  }

  whenIdle(): Promise<void> {
    return this.inflight;
  }

  mount(): this {
    this.root.innerHTML = "";
    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = "datascout explorer";
    header.appendChild(title);

    const searchBox = document.createElement("div");
    searchBox.className = "search-box";
    this.searchInput = document.createElement("input");
    this.searchInput.id = "search-input";
    this.searchInput.placeholder = "search datasets by name";
    this.searchInput.autocomplete = "off";
    this.searchResults = document.createElement("ul");
    this.searchResults.id = "search-results";
    searchBox.appendChild(this.searchInput);
    searchBox.appendChild(this.searchResults);
    header.appendChild(searchBox);
    this.root.appendChild(header);

    const controls = document.createElement("div");
    controls.id = "controls";
    this.taskSelect = this.buildSelect("task-select", TASKS);
    this.modeSelect = this.buildSelect("mode-select", MODES);
    this.nInput = document.createElement("input");
    this.nInput.id = "n-input";
    this.nInput.type = "number";
    this.nInput.min = "1";
    this.nInput.max = "100";
    this.llmToggle = document.createElement("input");
    this.llmToggle.id = "llm-toggle";
    this.llmToggle.type = "checkbox";
    controls.appendChild(this.labeled("task", this.taskSelect));
    controls.appendChild(this.labeled("mode", this.modeSelect));
    controls.appendChild(this.labeled("top N", this.nInput));
    controls.appendChild(this.labeled("LLM filter", this.llmToggle));
    this.root.appendChild(controls);

    this.statusBox = document.createElement("div");
    this.statusBox.id = "status";
    this.datasetBox = document.createElement("div");
    this.datasetBox.id = "dataset";
    this.resultsBox = document.createElement("div");
    this.resultsBox.id = "results";
    this.root.appendChild(this.statusBox);
    this.root.appendChild(this.datasetBox);
    this.root.appendChild(this.resultsBox);

    this.searchInput.addEventListener("input", () => {
      void this.runSearch(this.searchInput.value.trim());
    });
    this.taskSelect.addEventListener("change", () => {
      void this.navigate({ task: this.taskSelect.value as ExplorationState["task"] });
    });
    this.modeSelect.addEventListener("change", () => {
      void this.navigate({ mode: this.modeSelect.value as ExplorationState["mode"] });
    });
    this.nInput.addEventListener("change", () => {
      const n = Number(this.nInput.value);
      if (Number.isInteger(n) && n >= 1) void this.navigate({ n });
    });
    this.llmToggle.addEventListener("change", () => {
      void this.navigate({ useLlm: this.llmToggle.checked });
    });
    this.win.addEventListener("popstate", () => {
      const restored = stateFromParams(new URLSearchParams(this.win.location.search));
      this.state = restored;
      this.inflight = this.refresh();
    });
    return this;
  }

  boot(): Promise<void> {
    this.state = stateFromParams(new URLSearchParams(this.win.location.search));
    this.inflight = this.refresh();
    return this.inflight;
  }

  navigate(patch: Partial<ExplorationState>, push = true): Promise<void> {
    const next = { ...this.state, ...patch };
    if (statesEqual(next, this.state) && this.resultsBox.childElementCount > 0) {
      return this.inflight;
    }
    this.state = next;
    if (push) {
      const params = stateToParams(this.state);
      const api = new URLSearchParams(this.win.location.search).get("api");
      if (api) params.set("api", api);
      this.win.history.pushState(null, "", `?${params.toString()}`);
    }
    this.inflight = this.refresh();
    return this.inflight;
  }

  pivotTo(datasetId: string): Promise<void> {
    return this.navigate({ datasetId });
  }

  private buildSelect(id: string, values: readonly string[]): HTMLSelectElement {
    const select = document.createElement("select");
    select.id = id;
    for (const value of values) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      select.appendChild(option);
    }
    return select;
  }

  private labeled(text: string, control: HTMLElement): HTMLElement {
    const label = document.createElement("label");
    label.className = "control";
    const span = document.createElement("span");
    span.textContent = text;
    label.appendChild(span);
    label.appendChild(control);
    return label;
  }

  private syncControls(): void {
    this.taskSelect.value = this.state.task;
    this.modeSelect.value = this.state.mode;
    this.nInput.value = String(this.state.n);
    this.llmToggle.checked = this.state.useLlm;
  }

  private async runSearch(query: string): Promise<void> {
    this.searchAbort?.abort();
    this.searchResults.innerHTML = "";
    if (!query) return;
    this.searchAbort = new AbortController();
    let results: DatasetSummary[];
    try {
      results = (await this.api.search(query, this.searchAbort.signal)).results;
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      this.showError(`search failed: ${(err as Error).message}`, () => {
        void this.runSearch(query);
      });
      return;
    }
    for (const match of results) {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.type = "button";
      button.className = "search-hit";
      button.textContent = match.name;
      button.addEventListener("click", () => {
        this.searchResults.innerHTML = "";
        this.searchInput.value = "";
        void this.navigate({ datasetId: match.id });
      });
      item.appendChild(button);
      this.searchResults.appendChild(item);
    }
  }

  private showError(message: string, onRetry: () => void): void {
    this.statusBox.innerHTML = "";
    this.statusBox.appendChild(renderError(message, onRetry));
  }

  private async refresh(): Promise<void> {
    this.syncControls();
    this.statusBox.innerHTML = "";
    if (!this.state.datasetId) {
      this.datasetBox.innerHTML = "";
      this.resultsBox.innerHTML = "";
      this.resultsBox.appendChild(renderNotice("search for a dataset to begin exploring"));
      return;
    }
    this.queryAbort?.abort();
    this.queryAbort = new AbortController();
    const signal = this.queryAbort.signal;
    try {
      const [meta, response] = await Promise.all([
        this.api.dataset(this.state.datasetId, signal),
        this.api.query(this.state, signal),
      ]);
      if (signal.aborted) return;
      this.datasetBox.innerHTML = "";
      this.datasetBox.appendChild(renderDatasetCard(meta));
      this.renderResponse(response);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") return;
      if (err instanceof ServiceError && err.partial) {
        // LLM stage failed: show the retrieval-only partial result
        this.renderResponse(err.partial);
        this.statusBox.appendChild(
          renderError(`LLM unavailable, showing retrieval-only results: ${err.message}`, () => {
            this.inflight = this.refresh();
          }),
        );
        return;
      }
      this.showError((err as Error).message, () => {
        this.inflight = this.refresh();
      });
    }
  }

  private renderResponse(response: QueryResponse): void {
    this.resultsBox.innerHTML = "";
    this.resultsBox.appendChild(
      renderResults(response, (id) => {
        void this.pivotTo(id);
      }),
    );
  }
}

export function mountExplorer(root: HTMLElement, options: AppOptions = {}): ExplorerApp {
  const app = new ExplorerApp(root, options).mount();
  void app.boot();
  return app;
}

// browser entry point; tests import the pieces instead
if (typeof document !== "undefined" && document.getElementById("app")) {
  mountExplorer(document.getElementById("app")!);
}
