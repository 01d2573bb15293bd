"""Append-only store for human rationale/polarity annotations, agreement
statistics, and gold-corpus export.

The store is a JSONL log: nothing is ever deleted, corrections supersede
(latest seq wins per annotator and pmid), and replaying the log
reconstructs the exact read state.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict
from datetime import datetime, timezone

from .records import AbstractRecord

__all__ = [
    "AnnotationRecord",
    "AnnotationStore",
    "AnnotationError",
    "AgreementReport",
    "cohen_kappa",
    "rationale_agreement",
    "agreement_report",
    "export_gold",
]

POLARITY_VALUES = ("positive", "negative", "neutral")


class AnnotationError(ValueError):
    """Rejected annotation (unknown pmid, bad sentence reference, ...)."""


@dataclass
class AnnotationRecord:
    seq: int
    pmid: str
    annotator_id: str
    polarity: str
    rationale_sentences: list[tuple[int, int]]
    note: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rationale_sentences"] = [list(r) for r in self.rationale_sentences]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            seq=int(d["seq"]),
            pmid=str(d["pmid"]),
            annotator_id=str(d["annotator_id"]),
            polarity=str(d["polarity"]),
            rationale_sentences=[(int(a), int(b)) for a, b in d.get("rationale_sentences", [])],
            note=d.get("note"),
            timestamp=d.get("timestamp", ""),
        )


class AnnotationStore:
    """Single-writer append-only annotation log bound to a corpus."""

    def __init__(
        self,
        path,
        corpus: list[AbstractRecord] | None = None,
        polarity_only: bool = False,
        max_rationales: int = 0,
    ):
        self.path = str(path)
        self.polarity_only = polarity_only
        self.max_rationales = max_rationales
        self.by_pmid = {r.pmid: r for r in corpus} if corpus else None
        self.records: list[AnnotationRecord] = []
        if os.path.exists(self.path):
            self._replay()

    def _replay(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    self.records.append(AnnotationRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise AnnotationError(f"{self.path}: line {lineno}: corrupt annotation: {exc}") from exc

    @property
    def next_seq(self) -> int:
        return (self.records[-1].seq if self.records else 0) + 1

    def _validate(self, pmid: str, polarity: str, rationale_sentences) -> list[tuple[int, int]]:
        if polarity not in POLARITY_VALUES:
            raise AnnotationError(f"unknown polarity {polarity!r}")
        refs = sorted({(int(a), int(b)) for a, b in rationale_sentences})
        if self.by_pmid is not None:
            record = self.by_pmid.get(pmid)
            if record is None:
                raise AnnotationError(f"unknown pmid {pmid!r}")
            for sec_i, sent_i in refs:
                if not (0 <= sec_i < len(record.sections)):
                    raise AnnotationError(f"pmid {pmid}: no section {sec_i}")
                if not (0 <= sent_i < len(record.sections[sec_i].sentence_spans)):
                    raise AnnotationError(f"pmid {pmid}: section {sec_i} has no sentence {sent_i}")
        if not refs and not self.polarity_only:
            raise AnnotationError("at least one rationale sentence is required")
        if self.max_rationales and len(refs) > self.max_rationales:
            raise AnnotationError(f"at most {self.max_rationales} rationale sentence(s) allowed")
        return refs

    def record_annotation(
        self,
        pmid: str,
        annotator_id: str,
        polarity: str,
        rationale_sentences,
        note: str | None = None,
    ) -> AnnotationRecord:
        if not annotator_id:
            raise AnnotationError("annotator_id is required")
        refs = self._validate(pmid, polarity, rationale_sentences)
        rec = AnnotationRecord(
            seq=self.next_seq,
            pmid=pmid,
            annotator_id=annotator_id,
            polarity=polarity,
            rationale_sentences=refs,
            note=note,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        self.records.append(rec)
        return rec

    def latest(self, annotator_id: str) -> dict[str, AnnotationRecord]:
        """Latest annotation per pmid for one annotator (supersede rule)."""
        out: dict[str, AnnotationRecord] = {}
        for rec in self.records:
            if rec.annotator_id == annotator_id:
                out[rec.pmid] = rec
        return out

    def latest_all(self) -> dict[str, dict[str, AnnotationRecord]]:
        """pmid -> annotator -> latest annotation."""
        out: dict[str, dict[str, AnnotationRecord]] = {}
        for rec in self.records:
            out.setdefault(rec.pmid, {})[rec.annotator_id] = rec
        return out

    def annotators(self) -> list[str]:
        return sorted({r.annotator_id for r in self.records})


def cohen_kappa(labels_a: list[str], labels_b: list[str]) -> float:
    """Chance-corrected agreement with expected agreement from each
    rater's own marginal distribution."""
    if len(labels_a) != len(labels_b):
        raise ValueError(f"label lists differ in length: {len(labels_a)} vs {len(labels_b)}")
    if not labels_a:
        raise ValueError("empty label lists")
    n = len(labels_a)
    p_o = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    marg_a: dict[str, float] = {}
    marg_b: dict[str, float] = {}
    for a in labels_a:
        marg_a[a] = marg_a.get(a, 0) + 1 / n
    for b in labels_b:
        marg_b[b] = marg_b.get(b, 0) + 1 / n
    p_e = sum(marg_a[k] * marg_b.get(k, 0.0) for k in marg_a)
    if p_e >= 1.0:
        if p_o == 1.0:
            return 1.0
        raise ValueError("expected agreement is 1 with observed disagreement")
    return (p_o - p_e) / (1.0 - p_e)


def rationale_agreement(sets_a: list[set], sets_b: list[set]) -> tuple[float, float]:
    """(exact-match rate, mean Jaccard); empty vs empty counts as 1."""
    if len(sets_a) != len(sets_b):
        raise ValueError(f"set lists differ in length: {len(sets_a)} vs {len(sets_b)}")
    if not sets_a:
        raise ValueError("empty set lists")
    exact = 0
    jaccard_sum = 0.0
    for a, b in zip(sets_a, sets_b):
        a, b = set(a), set(b)
        if a == b:
            exact += 1
        union = a | b
        jaccard_sum += len(a & b) / len(union) if union else 1.0
    n = len(sets_a)
    return exact / n, jaccard_sum / n


@dataclass
class AgreementReport:
    kappa_polarity: float
    rationale_exact_rate: float
    rationale_mean_jaccard: float
    n_common: int

    def to_dict(self) -> dict:
        return asdict(self)


def agreement_report(store: AnnotationStore, annotator_a: str, annotator_b: str) -> AgreementReport:
    """Agreement over the abstracts both annotators completed."""
    latest_a = store.latest(annotator_a)
    latest_b = store.latest(annotator_b)
    common = sorted(set(latest_a) & set(latest_b))
    if not common:
        return AgreementReport(0.0, 0.0, 0.0, 0)
    labels_a = [latest_a[p].polarity for p in common]
    labels_b = [latest_b[p].polarity for p in common]
    sets_a = [set(latest_a[p].rationale_sentences) for p in common]
    sets_b = [set(latest_b[p].rationale_sentences) for p in common]
    exact, jaccard = rationale_agreement(sets_a, sets_b)
    return AgreementReport(
        kappa_polarity=cohen_kappa(labels_a, labels_b),
        rationale_exact_rate=exact,
        rationale_mean_jaccard=jaccard,
        n_common=len(common),
    )


def export_gold(store: AnnotationStore, require_agreement: bool = False) -> list[dict]:
    """One gold row per annotated pmid; under require_agreement only pmids
    where every annotator's latest polarity agrees. Rationale is the union
    of the annotators' latest sets."""
    gold = []
    latest_all = store.latest_all()
    for pmid in sorted(latest_all):
        per_annotator = latest_all[pmid]
        latest_overall = max(per_annotator.values(), key=lambda r: r.seq)
        polarities = {r.polarity for r in per_annotator.values()}
        if require_agreement and len(polarities) != 1:
            continue
        rationale = sorted(set().union(*(set(r.rationale_sentences) for r in per_annotator.values())))
        gold.append(
            {
                "pmid": pmid,
                "polarity": polarities.pop() if len(polarities) == 1 else latest_overall.polarity,
                "rationale_sentences": [list(r) for r in rationale],
                "annotators": sorted(per_annotator),
            }
        )
    return gold
