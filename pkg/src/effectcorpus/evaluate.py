"""Baselines, best-sentence selection, and cross-validated evaluation.

Two exact baselines: a majority classifier, and a signal-phrase count over
the abstract body with majority fallback. The cross-validation protocol is
stratified k-fold with a fixed seed; every report carries its full
experiment descriptor, plus the published reference accuracies for the
original 750-abstract corpus as context (those depended on a private gold
corpus and licensed concept annotations and are never asserted here).
"""
from __future__ import annotations

import json
import re
import random
from dataclasses import dataclass, field, asdict

from .records import AbstractRecord
from .classify import (
    build_vocabulary,
    label_order,
    predict,
    train_linear_svm,
    train_nb,
    vectorize,
)
from .textproc import default_stopwords, tokenize
from .titles import POLARITIES, parse_title

__all__ = [
    "majority_baseline",
    "signal_phrase_baseline",
    "best_sentence",
    "BestSentence",
    "stratified_folds",
    "cross_validate",
    "ExperimentConfig",
    "EvalReport",
    "run_matrix",
    "gold_labels",
    "REFERENCE_ACCURACIES",
]

# Accuracy figures reported for the original 750-abstract corpus; kept as
# context in reports, never asserted (they require that private corpus and
# licensed concept annotations).
REFERENCE_ACCURACIES = {
    "majority_baseline": 57.87,
    "signal_phrase_baseline": 61.60,
    "full_abstract_linear_svm": 76.27,
    "full_abstract_group_filtered_concepts": 76.80,
    "best_sentence_only": 74.50,
    "normalized_abstract_linear_svm": 78.80,
}

_SIGNAL_RE = re.compile(r"\b(positive|negative|no|neutral)\s+(effect|impact|influence)\b", re.IGNORECASE)
_SIGNAL_POLARITY = {"positive": "positive", "negative": "negative", "no": "neutral", "neutral": "neutral"}


def majority_baseline(labels: list[str]) -> tuple[str, float]:
    """Most frequent class and its training-set accuracy; ties break by
    polarity order (positive < negative < neutral)."""
    if not labels:
        raise ValueError("empty label list")
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    ordered = label_order(counts)
    best = max(ordered, key=lambda c: counts[c])  # max keeps the first argmax
    return best, counts[best] / len(labels)


def signal_phrase_baseline(record: AbstractRecord, fallback: str) -> str:
    """Count polarity signal phrases in the abstract body; argmax class,
    with ties and zero hits falling back to the majority label."""
    body = " ".join(s.text for s in record.sections)
    counts = {p: 0 for p in POLARITIES}
    for m in _SIGNAL_RE.finditer(body):
        counts[_SIGNAL_POLARITY[m.group(1).lower()]] += 1
    top = max(counts.values())
    if top == 0:
        return fallback
    winners = [p for p in POLARITIES if counts[p] == top]
    return winners[0] if len(winners) == 1 else fallback


@dataclass(frozen=True)
class BestSentence:
    section_index: int
    sentence_index: int
    start: int
    end: int
    overlap: int
    text: str


def best_sentence(
    record: AbstractRecord,
    scope,
    stopwords: frozenset[str] | None = None,
) -> BestSentence | None:
    """The in-scope sentence with the largest stopword-free token overlap
    with the title; ties go to the earliest sentence in document order."""
    if stopwords is None:
        stopwords = default_stopwords()
    wanted = {getattr(l, "value", l) for l in scope}
    title_tokens = {t.normalized for t in tokenize(record.title, drop_stopwords=True, stopwords=stopwords)}
    best: BestSentence | None = None
    for si, sec in enumerate(record.sections):
        if not wanted & set(sec.label_canonical):
            continue
        for qi, (start, end) in enumerate(sec.sentence_spans):
            sent = sec.text[start:end]
            tokens = {t.normalized for t in tokenize(sent, drop_stopwords=True, stopwords=stopwords)}
            overlap = len(title_tokens & tokens)
            if best is None or overlap > best.overlap:
                best = BestSentence(si, qi, start, end, overlap, sent)
    return best


def gold_labels(records: list[AbstractRecord]) -> tuple[list[AbstractRecord], list[str]]:
    """Polarity labels derived from each record's title phrase; records
    without a parsable polarity are dropped."""
    kept, labels = [], []
    for rec in records:
        parse = parse_title(rec.title)
        if parse is not None:
            kept.append(rec)
            labels.append(parse.polarity)
    return kept, labels


def stratified_folds(labels: list[str], folds: int, seed: int) -> list[list[int]]:
    """Deterministic stratified fold assignment: per-class seeded shuffle,
    then round-robin."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    for cls in label_order(by_class):
        if len(by_class[cls]) < folds:
            raise ValueError(f"class {cls!r} has {len(by_class[cls])} members, fewer than {folds} folds")
    rng = random.Random(seed)
    assignment: list[list[int]] = [[] for _ in range(folds)]
    for cls in label_order(by_class):
        idxs = list(by_class[cls])
        rng.shuffle(idxs)
        for k, idx in enumerate(idxs):
            assignment[k % folds].append(idx)
    return [sorted(f) for f in assignment]


@dataclass
class ExperimentConfig:
    name: str = "default"
    model_kind: str = "multinomial_nb"  # multinomial_nb | bernoulli_nb | linear_svm
    text_scope: str | list[str] = "full"  # "full" | "best-sentence" | list of canonical labels
    include_title: bool = False
    folds: int = 10
    seed: int = 42
    alpha: float = 1.0
    lam: float = 1e-4
    epochs: int = 100
    min_df: int = 1

    def descriptor(self) -> dict:
        d = asdict(self)
        if isinstance(d["text_scope"], list):
            d["text_scope"] = list(d["text_scope"])
        return d


@dataclass
class EvalReport:
    config: dict
    classes: list[str]
    fold_accuracies: list[float]
    mean_accuracy: float
    confusion: dict[str, dict[str, int]]
    n_records: int
    reference_accuracies: dict[str, float] = field(default_factory=lambda: dict(REFERENCE_ACCURACIES))

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True, indent=2)


def document_tokens(record: AbstractRecord, config: ExperimentConfig) -> list[str]:
    scope = config.text_scope
    if scope == "best-sentence":
        hit = best_sentence(record, {"Results", "Conclusions"})
        text = hit.text if hit else ""
    elif scope == "full":
        text = " ".join(s.text for s in record.sections)
    else:
        wanted = set(scope)
        text = " ".join(s.text for s in record.sections if wanted & set(s.label_canonical))
    if config.include_title:
        text = record.title + " " + text
    return [t.normalized for t in tokenize(text)]


def _mode_for(kind: str) -> str:
    return "binary" if kind == "bernoulli_nb" else "counts"


def _train(kind: str, vectors, labels, config: ExperimentConfig, vocab):
    if kind == "multinomial_nb":
        return train_nb(vectors, labels, "multinomial", alpha=config.alpha, vocabulary=vocab)
    if kind == "bernoulli_nb":
        return train_nb(vectors, labels, "bernoulli", alpha=config.alpha, vocabulary=vocab)
    if kind == "linear_svm":
        return train_linear_svm(
            vectors, labels, lam=config.lam, epochs=config.epochs, seed=config.seed, vocabulary=vocab
        )
    raise ValueError(f"unknown model kind {kind!r}")


def cross_validate(records: list[AbstractRecord], labels: list[str], config: ExperimentConfig) -> EvalReport:
    """Stratified k-fold evaluation. Vocabularies and all statistics are
    fit on the training folds only."""
    if len(records) != len(labels):
        raise ValueError("records and labels must be aligned")
    folds = stratified_folds(labels, config.folds, config.seed)
    classes = label_order(labels)
    docs = [document_tokens(r, config) for r in records]
    mode = _mode_for(config.model_kind)
    confusion = {g: {p: 0 for p in classes} for g in classes}
    fold_accs = []
    for test_idx in folds:
        test_set = set(test_idx)
        train_idx = [i for i in range(len(records)) if i not in test_set]
        vocab = build_vocabulary([docs[i] for i in train_idx], min_df=config.min_df)
        train_vecs = [vectorize(docs[i], vocab, mode) for i in train_idx]
        model = _train(config.model_kind, train_vecs, [labels[i] for i in train_idx], config, vocab)
        correct = 0
        for i in test_idx:
            pred, _scores = predict(model, vectorize(docs[i], vocab, mode))
            confusion[labels[i]][pred] += 1
            if pred == labels[i]:
                correct += 1
        fold_accs.append(correct / len(test_idx))
    return EvalReport(
        config=config.descriptor(),
        classes=classes,
        fold_accuracies=fold_accs,
        mean_accuracy=sum(fold_accs) / len(fold_accs),
        confusion=confusion,
        n_records=len(records),
    )


def run_matrix(records: list[AbstractRecord], labels: list[str], matrix: dict) -> list[EvalReport]:
    """Run every experiment descriptor in a matrix config dict."""
    reports = []
    for exp in matrix.get("experiments", []):
        config = ExperimentConfig(**exp)
        reports.append(cross_validate(records, labels, config))
    return reports


def render_matrix_table(reports: list[EvalReport]) -> str:
    lines = [f"{'experiment':<36}{'model':<16}{'scope':<24}{'accuracy':>9}"]
    for rep in reports:
        scope = rep.config["text_scope"]
        scope = "+".join(scope) if isinstance(scope, list) else scope
        lines.append(
            f"{rep.config['name']:<36}{rep.config['model_kind']:<16}{scope:<24}{rep.mean_accuracy:>8.2%}"
        )
    return "\n".join(lines)
