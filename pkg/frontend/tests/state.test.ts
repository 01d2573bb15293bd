import { describe, expect, it } from "vitest";

import {
  applyTask,
  canSubmit,
  emptySession,
  polarityForKey,
  sentenceIds,
  setPolarity,
  toggleSentence,
} from "../src/state.js";
import type { NextTaskResponse, TaskView } from "../src/types.js";

import taskFixture from "./fixtures/taskview_achd.json";

const TASK = taskFixture as unknown as TaskView;

function sessionWithTask(overrides: Partial<TaskView> = {}) {
  const response: NextTaskResponse = {
    done: false,
    task: { ...TASK, ...overrides },
    progress: { done: 0, total: 30 },
  };
  return applyTask(emptySession("alice"), response);
}

describe("toggleSentence", () => {
  it("clicking the same sentence twice empties the selection", () => {
    let s = sessionWithTask();
    s = toggleSentence(s, [0, 0]);
    expect(s.selected).toEqual([[0, 0]]);
    s = toggleSentence(s, [0, 0]);
    expect(s.selected).toEqual([]);
  });

  it("keeps selection order for multiple sentences", () => {
    let s = sessionWithTask();
    s = toggleSentence(s, [1, 2]);
    s = toggleSentence(s, [0, 1]);
    expect(s.selected).toEqual([
      [1, 2],
      [0, 1],
    ]);
  });

  it("selecting past the cap drops the oldest selection", () => {
    let s = sessionWithTask({ max_rationales: 1 });
    s = toggleSentence(s, [0, 0]);
    s = toggleSentence(s, [0, 1]);
    expect(s.selected).toEqual([[0, 1]]);
  });

  it("cap of zero means unlimited", () => {
    let s = sessionWithTask({ max_rationales: 0 });
    for (const id of sentenceIds(TASK)) {
      s = toggleSentence(s, id);
    }
    expect(s.selected.length).toBe(sentenceIds(TASK).length);
  });
});

describe("polarity keys", () => {
  it("maps 1/2/3 to positive/negative/neutral", () => {
    expect(polarityForKey("1")).toBe("positive");
    expect(polarityForKey("2")).toBe("negative");
    expect(polarityForKey("3")).toBe("neutral");
    expect(polarityForKey("4")).toBeNull();
    expect(polarityForKey("a")).toBeNull();
  });
});

describe("canSubmit", () => {
  it("requires a polarity and at least one sentence", () => {
    let s = sessionWithTask();
    expect(canSubmit(s)).toBe(false);
    s = setPolarity(s, "neutral");
    expect(canSubmit(s)).toBe(false);
    s = toggleSentence(s, [0, 0]);
    expect(canSubmit(s)).toBe(true);
  });

  it("polarity alone is enough in polarity-only mode", () => {
    let s = sessionWithTask({ polarity_only: true });
    expect(canSubmit(s)).toBe(false);
    s = setPolarity(s, "positive");
    expect(canSubmit(s)).toBe(true);
  });

  it("is false while a submit is in flight", () => {
    let s = sessionWithTask();
    s = setPolarity(toggleSentence(s, [0, 0]), "neutral");
    expect(canSubmit({ ...s, submitStatus: "inflight" })).toBe(false);
  });

  it("is false with no task loaded", () => {
    expect(canSubmit(emptySession("alice"))).toBe(false);
  });
});

describe("applyTask", () => {
  it("clears selections and polarity on task change", () => {
    let s = sessionWithTask();
    s = setPolarity(toggleSentence(s, [0, 0]), "positive");
    const next = applyTask(s, { done: false, task: TASK, progress: { done: 1, total: 30 } });
    expect(next.selected).toEqual([]);
    expect(next.polarity).toBeNull();
    expect(next.progress.done).toBe(1);
  });

  it("records the done marker", () => {
    const s = applyTask(emptySession("a"), { done: true, task: null, progress: { done: 30, total: 30 } });
    expect(s.done).toBe(true);
    expect(s.task).toBeNull();
  });
});
