// Bootstrap: one annotator, one abstract at a time, submit advances.

import { ApiError, fetchNextTask, postAnnotation } from "./api.js";
import {
  applyTask,
  canSubmit,
  emptySession,
  polarityForKey,
  setNote,
  setPolarity,
  toggleSentence,
  type SessionState,
} from "./state.js";
import { renderApp, type Handlers } from "./view.js";

const STORAGE_KEY = "effectcorpus.annotator_id";

let state: SessionState;
let root: HTMLElement;

function rerender(): void {
  renderApp(root, state, handlers);
}

function update(next: SessionState): void {
  state = next;
  rerender();
}

async function loadNext(): Promise<void> {
  try {
    const response = await fetchNextTask(state.annotatorId);
    update(applyTask(state, response));
  } catch (err) {
    update({
      ...state,
      submitStatus: "error",
      errorMessage: err instanceof Error ? `could not fetch a task: ${err.message}` : "fetch failed",
    });
  }
}

async function submit(): Promise<void> {
  if (!canSubmit(state) || !state.task || !state.polarity) {
    return;
  }
  update({ ...state, submitStatus: "inflight", errorMessage: null });
  try {
    await postAnnotation(state.annotatorId, state.task.pmid, state.polarity, state.selected, state.note);
    await loadNext();
  } catch (err) {
    // rejection or network failure: keep all selections for a retry
    const message =
      err instanceof ApiError ? `submission rejected: ${err.message}` : "network failure, nothing was saved";
    update({ ...state, submitStatus: "error", errorMessage: message });
  }
}

const handlers: Handlers = {
  onToggleSentence: (id) => update(toggleSentence(state, id)),
  onSetPolarity: (polarity) => update(setPolarity(state, polarity)),
  onNoteChange: (note) => {
    state = setNote(state, note); // no rerender; the input already holds the text
  },
  onSubmit: () => void submit(),
  onRetry: () => {
    if (state.task) {
      void submit();
    } else {
      void loadNext();
    }
  },
};

function askAnnotatorId(): string {
  const stored = window.localStorage.getItem(STORAGE_KEY);
  if (stored) {
    return stored;
  }
  let entered = "";
  while (!entered) {
    entered = (window.prompt("annotator id:") ?? "").trim();
  }
  window.localStorage.setItem(STORAGE_KEY, entered);
  return entered;
}

function onKeyDown(event: KeyboardEvent): void {
  if (event.target instanceof HTMLInputElement) {
    return;
  }
  const polarity = polarityForKey(event.key);
  if (polarity) {
    update(setPolarity(state, polarity));
  } else if (event.key === "Enter" && canSubmit(state)) {
    void submit();
  }
}

export function start(): void {
  root = document.getElementById("app") as HTMLElement;
  state = emptySession(askAnnotatorId());
  rerender();
  document.addEventListener("keydown", onKeyDown);
  void loadNext();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
