import { describe, expect, it, vi } from "vitest";

import { renderResults, similarityBar } from "../src/render";
import type { QueryResponse } from "../src/types";

const RETRIEVAL_RESPONSE: QueryResponse = {
  task: "similar",
  dataset_id: "weather-01",
  mode: "dv",
  n: 3,
  use_llm: false,
  query_category: "el nino",
  hits: [
    { dataset_id: "a1", name: "Alpha Series One", rank: 1, score: 0.9123456789,
      source: "different_category", dice: 0.25, description_similarity: 0.51 },
    { dataset_id: "b2", name: "Beta Series Two", rank: 2, score: 0.58,
      source: "same_category", dice: 0.0, description_similarity: -0.12 },
    { dataset_id: "c3", name: "Gamma Series Three", rank: 3, score: 0.4000000001,
      source: "same_category", dice: 1.0, description_similarity: 0.33 },
  ],
  recommendation: null,
  estimation: null,
};

const LLM_RESPONSE: QueryResponse = {
  ...RETRIEVAL_RESPONSE,
  use_llm: true,
  recommendation: {
    warnings: [],
    entries: [
      { raw_name: "Beta Series Two", resolved_id: "b2", resolved_name: "Beta Series Two",
        source: "same_category", dice: 0.0, description_similarity: -0.12 },
      { raw_name: "Fictional Bulletin 2044", resolved_id: null, resolved_name: null,
        source: "generated_by_llm", dice: null, description_similarity: null },
    ],
  },
};

describe("retrieval list", () => {
  it("renders rows in service order with exact scores", () => {
    const section = renderResults(RETRIEVAL_RESPONSE, () => {});
    const rows = [...section.querySelectorAll<HTMLElement>(".result-row")];
    expect(rows).toHaveLength(3);
    rows.forEach((row, i) => {
      const hit = RETRIEVAL_RESPONSE.hits[i];
      expect(row.dataset.datasetId).toBe(hit.dataset_id);
      expect(row.dataset.rank).toBe(String(hit.rank));
      expect(Number(row.dataset.score)).toBe(hit.score);
      expect(row.querySelector(".result-name")?.textContent).toBe(hit.name);
    });
  });

  it("pivot button carries the dataset id", () => {
    const onPivot = vi.fn();
    const section = renderResults(RETRIEVAL_RESPONSE, onPivot);
    const buttons = [...section.querySelectorAll<HTMLButtonElement>(".pivot-button")];
    expect(buttons).toHaveLength(3);
    buttons[1].click();
    expect(onPivot).toHaveBeenCalledWith("b2");
  });
});

describe("LLM-filtered list", () => {
  it("generated entries get a distinct badge and no pivot button", () => {
    const section = renderResults(LLM_RESPONSE, () => {});
    const rows = [...section.querySelectorAll<HTMLElement>(".result-row")];
    expect(rows).toHaveLength(2);

    const real = rows[0];
    expect(real.querySelector(".badge")?.textContent).toBe("same category");
    expect(real.querySelector(".pivot-button")).not.toBeNull();

    const generated = rows[1];
    expect(generated.querySelector(".badge")?.textContent).toBe("generated by LLM");
    expect(generated.querySelector(".pivot-button")).toBeNull();
    expect(generated.className).toContain("generated_by_llm");
  });
});

describe("estimation view", () => {
  it("renders predicted labels as a plain ranked list", () => {
    const response: QueryResponse = {
      ...RETRIEVAL_RESPONSE,
      task: "tags",
      use_llm: true,
      estimation: { predicted: ["education", "survey data"], candidates: ["a", "b", "c"],
                    warnings: [] },
    };
    const section = renderResults(response, () => {});
    const labels = [...section.querySelectorAll(".predicted-label")].map((n) => n.textContent);
    expect(labels).toEqual(["education", "survey data"]);
    expect(section.querySelector(".pivot-button")).toBeNull();
  });
});

describe("similarity bars", () => {
  it("shows the raw value and clamps only the drawn width", () => {
    const bar = similarityBar("description (cosine)", -0.25);
    const value = bar.querySelector<HTMLElement>(".bar-value");
    expect(value?.dataset.rawValue).toBe("-0.25");
    expect(value?.textContent).toBe("-0.2500");
    const fill = bar.querySelector<HTMLElement>(".bar-fill");
    expect(fill?.style.width).toBe("0%");
  });

  it("renders n/a for missing values", () => {
    const bar = similarityBar("variable (Dice)", null);
    expect(bar.querySelector(".bar-missing")?.textContent).toBe("n/a");
  });
});
