// Pure session-state logic. Rendering and network are elsewhere; everything
// here is a plain function so the selection rules are directly testable.

import type { NextTaskResponse, Polarity, Progress, SentenceId, TaskView } from "./types.js";

export type SubmitStatus = "idle" | "inflight" | "error";

export interface SessionState {
  annotatorId: string;
  task: TaskView | null;
  done: boolean;
  selected: SentenceId[]; // in selection order, oldest first
  polarity: Polarity | null;
  note: string;
  submitStatus: SubmitStatus;
  errorMessage: string | null;
  progress: Progress;
}

export function emptySession(annotatorId: string): SessionState {
  return {
    annotatorId,
    task: null,
    done: false,
    selected: [],
    polarity: null,
    note: "",
    submitStatus: "idle",
    errorMessage: null,
    progress: { done: 0, total: 0 },
  };
}

export function idKey(id: SentenceId): string {
  return `${id[0]}:${id[1]}`;
}

/** Install a task response; selections never survive a task change. */
export function applyTask(state: SessionState, response: NextTaskResponse): SessionState {
  return {
    ...state,
    task: response.task,
    done: response.done,
    progress: response.progress,
    selected: [],
    polarity: null,
    note: "",
    submitStatus: "idle",
    errorMessage: null,
  };
}

/** Toggle a sentence; selecting past the cap drops the oldest selection. */
export function toggleSentence(state: SessionState, id: SentenceId): SessionState {
  const key = idKey(id);
  const without = state.selected.filter((s) => idKey(s) !== key);
  if (without.length < state.selected.length) {
    return { ...state, selected: without };
  }
  const cap = state.task?.max_rationales ?? 0;
  const selected = [...state.selected, id];
  while (cap > 0 && selected.length > cap) {
    selected.shift();
  }
  return { ...state, selected };
}

export function setPolarity(state: SessionState, polarity: Polarity): SessionState {
  return { ...state, polarity };
}

export function setNote(state: SessionState, note: string): SessionState {
  return { ...state, note };
}

const KEY_TO_POLARITY: Record<string, Polarity> = {
  "1": "positive",
  "2": "negative",
  "3": "neutral",
};

export function polarityForKey(key: string): Polarity | null {
  return KEY_TO_POLARITY[key] ?? null;
}

/** Submit needs a polarity and, unless polarity-only mode, a rationale. */
export function canSubmit(state: SessionState): boolean {
  if (state.task === null || state.submitStatus === "inflight") {
    return false;
  }
  if (state.polarity === null) {
    return false;
  }
  return state.task.polarity_only || state.selected.length >= 1;
}

/** Display-order sentence ids of a task; must round-trip with the server. */
export function sentenceIds(task: TaskView): SentenceId[] {
  return task.sections.flatMap((section) => section.sentences.map((s) => s.id));
}

export function isSelected(state: SessionState, id: SentenceId): boolean {
  return state.selected.some((s) => idKey(s) === idKey(id));
}
