// DOM rendering. The whole app re-renders on every state change; with one
// abstract on screen at a time that is plenty fast and keeps the view a
// pure function of the session state.

import { canSubmit, idKey, isSelected, type SessionState } from "./state.js";
import type { AbbreviationHint, Polarity, SentenceId, TaskView } from "./types.js";

export interface Handlers {
  onToggleSentence(id: SentenceId): void;
  onSetPolarity(polarity: Polarity): void;
  onNoteChange(note: string): void;
  onSubmit(): void;
  onRetry(): void;
}

const POLARITY_BUTTONS: Array<{ polarity: Polarity; label: string; key: string }> = [
  { polarity: "positive", label: "positive", key: "1" },
  { polarity: "negative", label: "negative", key: "2" },
  { polarity: "neutral", label: "neutral", key: "3" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Text with defined short forms wrapped in <abbr> hover hints. */
function withAbbreviationHints(text: string, hints: AbbreviationHint[]): (HTMLElement | Text)[] {
  const nodes: (HTMLElement | Text)[] = [];
  let cursor = 0;
  type Hit = { start: number; end: number; hint: AbbreviationHint };
  const hits: Hit[] = [];
  for (const hint of hints) {
    let from = 0;
    while (true) {
      const at = text.indexOf(hint.short, from);
      if (at < 0) {
        break;
      }
      const beforeOk = at === 0 || !/[\w]/.test(text[at - 1] ?? "");
      const afterChar = text[at + hint.short.length] ?? "";
      const afterOk = afterChar === "" || !/[\w]/.test(afterChar);
      if (beforeOk && afterOk) {
        hits.push({ start: at, end: at + hint.short.length, hint });
      }
      from = at + hint.short.length;
    }
  }
  hits.sort((a, b) => a.start - b.start);
  for (const hit of hits) {
    if (hit.start < cursor) {
      continue;
    }
    nodes.push(document.createTextNode(text.slice(cursor, hit.start)));
    const abbr = el("abbr", "abbrev-hint", text.slice(hit.start, hit.end));
    abbr.title = `${hit.hint.short} → ${hit.hint.long}`;
    nodes.push(abbr);
    cursor = hit.end;
  }
  nodes.push(document.createTextNode(text.slice(cursor)));
  return nodes;
}

function renderTitle(task: TaskView): HTMLElement {
  const block = el("header", "title-block");
  const h = el("h2", "abstract-title");
  const m = task.title_match;
  if (m && m.end > m.start) {
    h.append(document.createTextNode(task.title.slice(0, m.start)));
    h.append(el("mark", `polarity-${m.polarity}`, task.title.slice(m.start, m.end)));
    h.append(document.createTextNode(task.title.slice(m.end)));
  } else {
    h.textContent = task.title;
  }
  block.append(h, el("div", "pmid", `PMID ${task.pmid}`));
  return block;
}

function renderSections(task: TaskView, state: SessionState, handlers: Handlers): HTMLElement {
  const wrap = el("div", "sections");
  for (const section of task.sections) {
    const sec = el("section", "abstract-section");
    const heading = section.label_canonical.join(" / ") || "Others";
    const label = el("h3", "section-label", heading);
    if (section.label_raw) {
      label.title = `source heading: ${section.label_raw}`;
    }
    sec.append(label);
    const body = el("p", "section-body");
    section.sentences.forEach((sentence) => {
      const span = el("span", "sentence", sentence.text);
      span.dataset.sentenceId = idKey(sentence.id);
      if (isSelected(state, sentence.id)) {
        span.classList.add("selected");
      }
      const suggested = task.suggested_sentence;
      if (suggested && idKey(suggested) === idKey(sentence.id)) {
        span.classList.add("suggested");
        span.title = "closest to the title by word overlap";
      }
      span.replaceChildren(...withAbbreviationHints(sentence.text, task.abbreviations));
      span.addEventListener("click", () => handlers.onToggleSentence(sentence.id));
      body.append(span, document.createTextNode(" "));
    });
    sec.append(body);
    wrap.append(sec);
  }
  return wrap;
}

function renderControls(state: SessionState, handlers: Handlers): HTMLElement {
  const bar = el("div", "controls");
  const polarities = el("div", "polarity-buttons");
  for (const { polarity, label, key } of POLARITY_BUTTONS) {
    const btn = el("button", `polarity-btn polarity-${polarity}`, `${label} [${key}]`);
    btn.type = "button";
    if (state.polarity === polarity) {
      btn.classList.add("active");
    }
    btn.addEventListener("click", () => handlers.onSetPolarity(polarity));
    polarities.append(btn);
  }
  const note = el("input", "note-input") as HTMLInputElement;
  note.type = "text";
  note.placeholder = "note (optional)";
  note.value = state.note;
  note.addEventListener("input", () => handlers.onNoteChange(note.value));

  const submit = el("button", "submit-btn", "submit & next") as HTMLButtonElement;
  submit.type = "button";
  submit.disabled = !canSubmit(state);
  submit.addEventListener("click", () => handlers.onSubmit());

  const hint = state.task?.polarity_only
    ? "pick a polarity"
    : "pick a polarity and click at least one rationale sentence";
  bar.append(polarities, note, submit, el("div", "submit-hint", hint));
  return bar;
}

function renderProgress(state: SessionState): HTMLElement {
  return el("div", "progress", `${state.progress.done} / ${state.progress.total} annotated`);
}

function renderError(state: SessionState, handlers: Handlers): HTMLElement | null {
  if (state.submitStatus !== "error" || !state.errorMessage) {
    return null;
  }
  const banner = el("div", "error-banner");
  banner.append(el("span", "error-text", state.errorMessage));
  const retry = el("button", "retry-btn", "retry");
  retry.type = "button";
  retry.addEventListener("click", () => handlers.onRetry());
  banner.append(retry);
  return banner;
}

export function renderApp(root: HTMLElement, state: SessionState, handlers: Handlers): void {
  root.replaceChildren();
  const app = el("main", "annotator");
  app.append(renderProgress(state));
  const error = renderError(state, handlers);
  if (error) {
    app.append(error);
  }
  if (state.done) {
    const doneScreen = el("div", "done-screen");
    doneScreen.append(
      el("h2", undefined, "All abstracts annotated"),
      el("p", undefined, `${state.progress.done} of ${state.progress.total} complete. Thank you.`),
    );
    app.append(doneScreen);
  } else if (state.task) {
    app.append(renderTitle(state.task));
    app.append(renderSections(state.task, state, handlers));
    app.append(renderControls(state, handlers));
  } else {
    app.append(el("div", "loading", "loading task..."));
  }
  root.append(app);
}

/** Ids of the clickable units currently renderable, in display order. */
export function renderedSentenceIds(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll<HTMLElement>("[data-sentence-id]")).map(
    (n) => n.dataset.sentenceId ?? "",
  );
}
