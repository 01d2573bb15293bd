// JSON shapes served by the annotation service API.

export type Polarity = "positive" | "negative" | "neutral";

export type SentenceId = [number, number]; // [section index, sentence index]

export interface SentenceView {
  id: SentenceId;
  start: number;
  end: number;
  text: string;
}

export interface SectionView {
  label_raw: string;
  label_canonical: string[];
  text: string;
  sentences: SentenceView[];
}

export interface AbbreviationHint {
  short: string;
  long: string;
}

export interface TaskView {
  pmid: string;
  title: string;
  title_match: { polarity: Polarity; start: number; end: number } | null;
  sections: SectionView[];
  abbreviations: AbbreviationHint[];
  suggested_sentence: SentenceId | null;
  max_rationales: number; // 0 = unlimited
  polarity_only: boolean;
}

export interface Progress {
  done: number;
  total: number;
}

export interface NextTaskResponse {
  done: boolean;
  task: TaskView | null;
  progress: Progress;
}

export interface SubmitResponse {
  seq: number;
  record: unknown;
  progress: Progress;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
