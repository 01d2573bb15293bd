// Thin fetch client for the annotation service. The UI never mutates
// server state except through postAnnotation.

import type { NextTaskResponse, Polarity, SentenceId, SubmitResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  try {
    const body = (await resp.json()) as { error?: { code?: string; message?: string } };
    return new ApiError(body.error?.code ?? "unknown", body.error?.message ?? resp.statusText, resp.status);
  } catch {
    return new ApiError("unknown", resp.statusText, resp.status);
  }
}

export async function fetchNextTask(annotatorId: string): Promise<NextTaskResponse> {
  const resp = await fetch(`/api/task/next?annotator=${encodeURIComponent(annotatorId)}`);
  if (!resp.ok) {
    throw await parseError(resp);
  }
  return (await resp.json()) as NextTaskResponse;
}

export async function postAnnotation(
  annotatorId: string,
  pmid: string,
  polarity: Polarity,
  rationaleSentences: SentenceId[],
  note: string,
): Promise<SubmitResponse> {
  const resp = await fetch("/api/annotations", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({
      annotator_id: annotatorId,
      pmid,
      polarity,
      rationale_sentences: rationaleSentences,
      note: note || null,
    }),
  });
  if (!resp.ok) {
    throw await parseError(resp);
  }
  return (await resp.json()) as SubmitResponse;
}
