"""Section detection and mapping of raw section headings to the canonical
five-label set: Background and Objectives, Methods, Results, Conclusions,
and Others.
"""
from __future__ import annotations

import enum
import re
from functools import lru_cache
from importlib import resources

from .records import AbstractRecord, Section
from .textproc import split_sentences

__all__ = [
    "CanonicalLabel",
    "LabelMap",
    "map_label",
    "detect_sections",
    "fill_sentence_spans",
    "select_text",
]


class CanonicalLabel(str, enum.Enum):
    BACKGROUND_OBJECTIVES = "BackgroundObjectives"
    METHODS = "Methods"
    RESULTS = "Results"
    CONCLUSIONS = "Conclusions"
    OTHERS = "Others"


CANONICAL_ORDER = tuple(l.value for l in CanonicalLabel)

# Inline heading at a sentence start, e.g. "METHODS AND RESULTS:".
_HEADING_RE = re.compile(r"^([A-Z][A-Z /&-]{2,40}):\s*")
_COMBINER_RE = re.compile(r"\band\b|[&/]", re.IGNORECASE)
_LABEL_CLEAN_RE = re.compile(r"[^\w\s&/-]+")


class LabelMap:
    """Raw-heading synonym table; combined headings map to label unions."""

    def __init__(self, table: dict[str, frozenset[str]]):
        self.table = table

    @classmethod
    def from_file(cls, path) -> "LabelMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(cls._parse(fh.read()))

    @classmethod
    def default(cls) -> "LabelMap":
        return _default_label_map()

    @staticmethod
    def _parse(content: str) -> dict[str, frozenset[str]]:
        valid = {l.value for l in CanonicalLabel}
        table = {}
        for lineno, line in enumerate(content.splitlines(), start=1):
            line = line.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            try:
                raw, canon = line.split("\t")
            except ValueError:
                raise ValueError(f"label map line {lineno}: expected 'raw<TAB>canonical[,canonical]'")
            labels = frozenset(c.strip() for c in canon.split(","))
            unknown = labels - valid
            if unknown:
                raise ValueError(f"label map line {lineno}: unknown canonical labels {sorted(unknown)}")
            table[_normalize_label(raw)] = labels
        return table

    def lookup(self, raw: str) -> frozenset[str]:
        return map_label(raw, self)


@lru_cache(maxsize=1)
def _default_label_map() -> LabelMap:
    content = resources.files("effectcorpus.data").joinpath("section_labels.tsv").read_text("utf-8")
    return LabelMap(LabelMap._parse(content))


def _normalize_label(raw: str) -> str:
    cleaned = _LABEL_CLEAN_RE.sub(" ", raw.lower())
    return " ".join(cleaned.split())


def map_label(raw: str, label_map: LabelMap | None = None) -> frozenset[str]:
    """Canonical label set for a raw heading; unknown headings map to Others."""
    label_map = label_map or LabelMap.default()
    key = _normalize_label(raw)
    if not key:
        return frozenset({CanonicalLabel.OTHERS.value})
    hit = label_map.table.get(key)
    if hit:
        return hit
    # Combined headings ("METHODS AND RESULTS", "AIMS/METHODS") map to the
    # union of their parts.
    parts = [p for p in (_normalize_label(p) for p in _COMBINER_RE.split(key)) if p]
    if len(parts) > 1:
        union: set[str] = set()
        for part in parts:
            union |= label_map.table.get(part, frozenset())
        if union:
            return frozenset(union)
    return frozenset({CanonicalLabel.OTHERS.value})


def _ordered(labels: frozenset[str]) -> tuple[str, ...]:
    return tuple(l for l in CANONICAL_ORDER if l in labels)


def _split_inline(text: str) -> list[Section]:
    """Split one unlabeled block on inline headings at sentence starts."""
    breaks = []  # (heading_start, body_start, heading_text)
    for start, _ in split_sentences(text):
        m = _HEADING_RE.match(text[start:])
        if m:
            breaks.append((start, start + m.end(), m.group(1)))
    if not breaks:
        return [Section(label_raw="", text=text)]
    sections = []
    lead = text[: breaks[0][0]].strip()
    if lead:
        sections.append(Section(label_raw="", text=lead))
    for i, (h_start, b_start, heading) in enumerate(breaks):
        body_end = breaks[i + 1][0] if i + 1 < len(breaks) else len(text)
        sections.append(Section(label_raw=heading, text=text[b_start:body_end].strip()))
    return sections


def detect_sections(record: AbstractRecord, label_map: LabelMap | None = None) -> AbstractRecord:
    """Return a copy with sections detected and canonical labels filled.

    Records that already carry raw labels are only re-mapped (text is left
    byte-identical); unlabeled blocks are split on inline headings.
    """
    label_map = label_map or LabelMap.default()
    rec = record.copy()
    structured = any(s.label_raw.strip() for s in rec.sections)
    if not structured:
        split: list[Section] = []
        for sec in rec.sections:
            split.extend(_split_inline(sec.text))
        rec.sections = split
    for sec in rec.sections:
        sec.label_canonical = _ordered(map_label(sec.label_raw, label_map))
        if not sec.label_canonical:
            sec.label_canonical = (CanonicalLabel.OTHERS.value,)
    return rec


def fill_sentence_spans(record: AbstractRecord) -> AbstractRecord:
    rec = record.copy()
    for sec in rec.sections:
        sec.sentence_spans = tuple(split_sentences(sec.text))
    return rec


def select_text(record: AbstractRecord, labels) -> str:
    """Concatenate (single-space joins, document order) the text of all
    sections whose canonical label set intersects `labels`."""
    wanted = {getattr(l, "value", l) for l in labels}
    parts = [s.text for s in record.sections if wanted & set(s.label_canonical)]
    return " ".join(p for p in parts if p)
