import { describe, expect, it } from "vitest";

import {
  DEFAULT_STATE,
  MODES,
  TASKS,
  stateFromParams,
  stateToParams,
  statesEqual,
  type ExplorationState,
} from "../src/state";

describe("URL round-trip", () => {
  it("reproduces every field", () => {
    const cases: ExplorationState[] = [];
    for (const task of TASKS) {
      for (const mode of MODES) {
        cases.push({ datasetId: "weather-01", task, mode, n: 7, useLlm: true });
        cases.push({ datasetId: "econ-01", task, mode, n: 10, useLlm: false });
      }
    }
    cases.push({ ...DEFAULT_STATE });
    for (const state of cases) {
      const restored = stateFromParams(stateToParams(state));
      expect(statesEqual(restored, state)).toBe(true);
    }
  });

  it("keeps dataset ids with url-hostile characters", () => {
    const state: ExplorationState = {
      datasetId: "id with spaces&and=chars",
      task: "similar",
      mode: "d",
      n: 3,
      useLlm: false,
    };
    const parsed = new URLSearchParams(stateToParams(state).toString());
    expect(stateFromParams(parsed).datasetId).toBe(state.datasetId);
  });
});

describe("tolerant parsing", () => {
  it("falls back to defaults on junk", () => {
    const state = stateFromParams(new URLSearchParams("task=frobnicate&mode=x&n=-4&llm=maybe"));
    expect(state.task).toBe(DEFAULT_STATE.task);
    expect(state.mode).toBe(DEFAULT_STATE.mode);
    expect(state.n).toBe(DEFAULT_STATE.n);
    expect(state.useLlm).toBe(false);
    expect(state.datasetId).toBeNull();
  });

  it("ignores unrelated params", () => {
    const state = stateFromParams(
      new URLSearchParams("dataset=edu-03&task=tags&mode=v&n=5&llm=1&api=http://x"),
    );
    expect(state).toEqual({ datasetId: "edu-03", task: "tags", mode: "v", n: 5, useLlm: true });
  });
});
