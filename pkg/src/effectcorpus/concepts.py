"""Dictionary-based concept recognition and title-concept normalization.

Concepts found in a title are numbered X_1..X_n in order of first
appearance; every occurrence of a tagged concept in the record (dictionary
surface forms plus abbreviations whose long form contains the concept) is
replaced by its tag token. The replacement audit is complete enough to
restore the original text exactly.
"""
from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field

from .records import AbstractRecord
from .textproc import AbbrevPair, extract_abbreviations, split_sentences, tokenize

__all__ = [
    "ConceptDictionary",
    "ConceptMention",
    "ConceptTag",
    "load_dictionary",
    "recognize",
    "title_tags",
    "normalize",
    "strip_tags",
    "record_abbreviations",
    "load_external_annotations",
]

_TAG_RE = re.compile(r"^X_[1-9][0-9]*$")


@dataclass
class ConceptEntry:
    concept_id: str
    canonical_name: str
    semantic_group: str
    synonyms: list[str] = field(default_factory=list)

    @property
    def surface_forms(self) -> list[str]:
        return [self.canonical_name] + self.synonyms


@dataclass
class ConceptDictionary:
    entries: dict[str, ConceptEntry] = field(default_factory=dict)

    def __post_init__(self):
        self._index: dict[str, list[tuple[tuple[str, ...], str, str]]] = {}
        for entry in self.entries.values():
            for surface in entry.surface_forms:
                self._add_surface(entry.concept_id, surface)

    def _add_surface(self, concept_id: str, surface: str) -> None:
        toks = tuple(t.normalized for t in tokenize(surface))
        if not toks:
            return
        bucket = self._index.setdefault(toks[0], [])
        item = (toks, concept_id, surface)
        if item not in bucket:
            bucket.append(item)
            bucket.sort(key=lambda x: -len(x[0]))

    def add(self, concept_id: str, canonical_name: str, synonym: str, semantic_group: str) -> bool:
        """Add one (concept, synonym) row; returns False on duplicate."""
        entry = self.entries.get(concept_id)
        if entry is None:
            entry = ConceptEntry(concept_id, canonical_name, semantic_group)
            self.entries[concept_id] = entry
            self._add_surface(concept_id, canonical_name)
        if synonym.lower() in {s.lower() for s in entry.surface_forms}:
            return False
        entry.synonyms.append(synonym)
        self._add_surface(concept_id, synonym)
        return True

    def surfaces_of(self, concept_id: str) -> list[str]:
        entry = self.entries.get(concept_id)
        return entry.surface_forms if entry else []

    def __len__(self) -> int:
        return len(self.entries)


def load_dictionary(path, groups_filter: set[str] | None = None) -> ConceptDictionary:
    """Load a TSV dictionary: concept_id, canonical_name, synonym, group."""
    d = ConceptDictionary()
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip() or stripped.lstrip().startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
            concept_id, name, synonym, group = (p.strip() for p in parts)
            if not concept_id or not synonym:
                raise ValueError(f"{path}: line {lineno}: empty concept_id or synonym")
            if groups_filter is not None and group not in groups_filter:
                continue
            key = (concept_id, synonym.lower())
            if key in seen:
                warnings.warn(f"{path}: line {lineno}: duplicate synonym {synonym!r} for {concept_id}; first wins")
                continue
            seen.add(key)
            d.add(concept_id, name, synonym, group)
    return d


@dataclass(frozen=True)
class ConceptMention:
    concept_id: str
    start: int
    end: int
    surface: str
    via: str = "dictionary"  # or "abbreviation_link"


@dataclass
class ConceptTag:
    index: int
    concept_id: str
    linked_short_forms: list[str] = field(default_factory=list)

    @property
    def token(self) -> str:
        return f"X_{self.index}"


def recognize(
    text: str,
    dictionary: ConceptDictionary,
    extra_mentions: list[ConceptMention] | None = None,
) -> list[ConceptMention]:
    """Greedy longest-match dictionary lookup, left to right, aligned to
    token boundaries; overlapping shorter matches are suppressed."""
    tokens = tokenize(text)
    extra_by_start: dict[int, ConceptMention] = {}
    if extra_mentions:
        for m in extra_mentions:
            at = extra_by_start.get(m.start)
            if at is None or m.end > at.end:
                extra_by_start[m.start] = m
    mentions: list[ConceptMention] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        best: ConceptMention | None = extra_by_start.get(tok.start)
        for toks, concept_id, _surface in dictionary._index.get(tok.normalized, ()):
            if i + len(toks) > len(tokens):
                continue
            if all(tokens[i + k].normalized == toks[k] for k in range(len(toks))):
                end = tokens[i + len(toks) - 1].end
                if best is None or end > best.end:
                    best = ConceptMention(concept_id, tok.start, end, text[tok.start : end])
                break  # index is sorted longest-first
        if best is not None:
            mentions.append(best)
            while i < len(tokens) and tokens[i].start < best.end:
                i += 1
        else:
            i += 1
    return mentions


def record_abbreviations(record: AbstractRecord) -> list[AbbrevPair]:
    """All abbreviation pairs defined in the record's sections."""
    pairs = []
    for sec in record.sections:
        pairs.extend(extract_abbreviations(sec.text))
    return pairs


def title_tags(
    record: AbstractRecord,
    dictionary: ConceptDictionary,
    abbrevs: list[AbbrevPair] | None = None,
    extra_title_mentions: list[ConceptMention] | None = None,
) -> list[ConceptTag]:
    """Tag the distinct concepts of the title X_1..X_n by first appearance,
    linking abbreviations whose long form contains a tagged concept."""
    mentions = recognize(record.title, dictionary, extra_title_mentions)
    tags: list[ConceptTag] = []
    by_concept: dict[str, ConceptTag] = {}
    for m in mentions:
        if m.concept_id not in by_concept:
            tag = ConceptTag(index=len(tags) + 1, concept_id=m.concept_id)
            tags.append(tag)
            by_concept[m.concept_id] = tag
    if abbrevs is None:
        abbrevs = record_abbreviations(record)
    for pair in abbrevs:
        for m in recognize(pair.long_form, dictionary):
            tag = by_concept.get(m.concept_id)
            if tag and pair.short_form not in tag.linked_short_forms:
                tag.linked_short_forms.append(pair.short_form)
                break
    return tags


def _replacement_surfaces(tags: list[ConceptTag], dictionary: ConceptDictionary):
    """(token tuple, tag) pairs for every surface of every tagged concept,
    longest surfaces first."""
    out: list[tuple[tuple[str, ...], ConceptTag]] = []
    for tag in tags:
        for surface in dictionary.surfaces_of(tag.concept_id):
            toks = tuple(t.normalized for t in tokenize(surface))
            if toks:
                out.append((toks, tag))
        for short in tag.linked_short_forms:
            toks = tuple(t.normalized for t in tokenize(short))
            if toks:
                out.append((toks, tag))
    out.sort(key=lambda x: -len(x[0]))
    return out


def _replace_in_text(
    text: str,
    surfaces: list[tuple[tuple[str, ...], ConceptTag]],
    imported: list[ConceptMention] | None,
    tag_of_concept: dict[str, ConceptTag],
) -> tuple[str, list[dict]]:
    tokens = tokenize(text)
    matches: list[tuple[int, int, ConceptTag]] = []
    imported_by_start = {}
    if imported:
        for m in imported:
            tag = tag_of_concept.get(m.concept_id)
            if tag is not None:
                imported_by_start[m.start] = (m.end, tag)
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        found = None
        for toks, tag in surfaces:
            if i + len(toks) > len(tokens):
                continue
            if all(tokens[i + k].normalized == toks[k] for k in range(len(toks))):
                found = (tok.start, tokens[i + len(toks) - 1].end, tag)
                break
        if found is None and tok.start in imported_by_start:
            end, tag = imported_by_start[tok.start]
            found = (tok.start, end, tag)
        if found is not None:
            matches.append(found)
            while i < len(tokens) and tokens[i].start < found[1]:
                i += 1
        else:
            i += 1
    pieces = []
    audit = []
    cursor = 0
    out_len = 0
    for start, end, tag in matches:
        pieces.append(text[cursor:start])
        out_len += start - cursor
        pieces.append(tag.token)
        audit.append(
            {
                "start": start,
                "end": end,
                "norm_start": out_len,
                "norm_end": out_len + len(tag.token),
                "surface": text[start:end],
                "tag": tag.token,
                "concept_id": tag.concept_id,
            }
        )
        out_len += len(tag.token)
        cursor = end
    pieces.append(text[cursor:])
    return "".join(pieces), audit


def normalize(
    record: AbstractRecord,
    tags: list[ConceptTag],
    dictionary: ConceptDictionary,
    imported: dict[str, list[ConceptMention]] | None = None,
) -> tuple[AbstractRecord, list[dict]]:
    """Replace each mention of every tagged concept with its X_i token.

    Returns the rewritten record and an audit; applying the audit with
    `strip_tags` restores the original record exactly. `imported` maps a
    field name ("title" or "section:<i>") to externally supplied mentions.
    """
    rec = record.copy()
    audit: list[dict] = []
    if not tags:
        return rec, audit
    surfaces = _replacement_surfaces(tags, dictionary)
    tag_of_concept = {t.concept_id: t for t in tags}
    imported = imported or {}

    def apply(field_name: str, text: str) -> str:
        new_text, entries = _replace_in_text(text, surfaces, imported.get(field_name), tag_of_concept)
        for e in entries:
            e["pmid"] = rec.pmid
            e["field"] = field_name
        audit.extend(entries)
        return new_text

    rec.title = apply("title", rec.title)
    for i, sec in enumerate(rec.sections):
        had_spans = bool(sec.sentence_spans)
        sec.text = apply(f"section:{i}", sec.text)
        if had_spans:
            sec.sentence_spans = tuple(split_sentences(sec.text))
    return rec, audit


def strip_tags(record: AbstractRecord, audit: list[dict]) -> AbstractRecord:
    """Invert `normalize` using its audit."""
    rec = record.copy()
    by_field: dict[str, list[dict]] = {}
    for e in audit:
        if e["pmid"] == rec.pmid:
            by_field.setdefault(e["field"], []).append(e)
    for field_name, entries in by_field.items():
        if field_name == "title":
            text = rec.title
        else:
            text = rec.sections[int(field_name.split(":", 1)[1])].text
        for e in sorted(entries, key=lambda e: -e["norm_start"]):
            text = text[: e["norm_start"]] + e["surface"] + text[e["norm_end"] :]
        if field_name == "title":
            rec.title = text
        else:
            idx = int(field_name.split(":", 1)[1])
            rec.sections[idx].text = text
            if rec.sections[idx].sentence_spans:
                rec.sections[idx].sentence_spans = tuple(split_sentences(text))
    return rec


def load_external_annotations(path, groups_filter: set[str] | None = None) -> dict[str, list[dict]]:
    """Read precomputed concept annotations (JSONL: pmid, start, end,
    concept_id, semantic_group); offsets refer to the record's title and
    section texts joined with single newlines."""
    by_pmid: dict[str, list[dict]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                item = {
                    "pmid": str(d["pmid"]),
                    "start": int(d["start"]),
                    "end": int(d["end"]),
                    "concept_id": str(d["concept_id"]),
                    "semantic_group": str(d.get("semantic_group", "")),
                }
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: malformed annotation: {exc}") from exc
            if groups_filter is not None and item["semantic_group"] not in groups_filter:
                continue
            by_pmid.setdefault(item["pmid"], []).append(item)
    return by_pmid


def locate_external_mentions(record: AbstractRecord, annotations: list[dict]) -> dict[str, list[ConceptMention]]:
    """Convert flat-offset annotations to per-field mentions.

    The flat layout is title + "\\n" + each section text joined by "\\n".
    Annotations that cross field boundaries are ignored.
    """
    fields: list[tuple[str, int, int]] = []
    offset = 0
    fields.append(("title", 0, len(record.title)))
    offset = len(record.title) + 1
    for i, sec in enumerate(record.sections):
        fields.append((f"section:{i}", offset, offset + len(sec.text)))
        offset += len(sec.text) + 1
    flat = "\n".join([record.title] + [s.text for s in record.sections])
    out: dict[str, list[ConceptMention]] = {}
    for ann in annotations:
        for name, f_start, f_end in fields:
            if f_start <= ann["start"] and ann["end"] <= f_end:
                out.setdefault(name, []).append(
                    ConceptMention(
                        concept_id=ann["concept_id"],
                        start=ann["start"] - f_start,
                        end=ann["end"] - f_start,
                        surface=flat[ann["start"] : ann["end"]],
                        via="dictionary",
                    )
                )
                break
    return out
