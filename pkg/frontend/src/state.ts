// Exploration state and its URL round-trip. Deep links carry the whole
// view (dataset, task, mode, n, LLM toggle), so any prior query can be
// reproduced from location.search alone.

export const TASKS = ["similar", "combinable", "tags", "variables"] as const;
export const MODES = ["d", "v", "dv"] as const;

export type Task = (typeof TASKS)[number];
export type Mode = (typeof MODES)[number];

export interface ExplorationState {
  datasetId: string | null;
  task: Task;
  mode: Mode;
  n: number;
  useLlm: boolean;
}

export const DEFAULT_STATE: ExplorationState = {
  datasetId: null,
  task: "similar",
  mode: "dv",
  n: 10,
  useLlm: false,
};

export function stateToParams(state: ExplorationState): URLSearchParams {
  const params = new URLSearchParams();
  if (state.datasetId) params.set("dataset", state.datasetId);
  params.set("task", state.task);
  params.set("mode", state.mode);
  params.set("n", String(state.n));
  params.set("llm", state.useLlm ? "1" : "0");
  return params;
}

export function stateFromParams(params: URLSearchParams): ExplorationState {
  const task = params.get("task");
  const mode = params.get("mode");
  const n = Number(params.get("n"));
  return {
    datasetId: params.get("dataset"),
    task: (TASKS as readonly string[]).includes(task ?? "") ? (task as Task) : DEFAULT_STATE.task,
    mode: (MODES as readonly string[]).includes(mode ?? "") ? (mode as Mode) : DEFAULT_STATE.mode,
    n: Number.isInteger(n) && n >= 1 && n <= 100 ? n : DEFAULT_STATE.n,
    useLlm: params.get("llm") === "1",
  };
}

export function statesEqual(a: ExplorationState, b: ExplorationState): boolean {
  return (
    a.datasetId === b.datasetId &&
    a.task === b.task &&
    a.mode === b.mode &&
    a.n === b.n &&
    a.useLlm === b.useLlm
  );
}
