"""Abstract records: PubMed XML ingestion and canonical JSONL storage.

The canonical on-disk form is line-delimited JSON with sorted keys, UTF-8,
NFC-normalized text, one record per line. Two writes of the same corpus are
byte-identical, which makes stage outputs digestable and diffable.
"""
from __future__ import annotations

import gzip
import hashlib
import json
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

__all__ = [
    "Section",
    "AbstractRecord",
    "CorpusManifest",
    "ParseResult",
    "CorpusError",
    "parse_pubmed_xml",
    "read_corpus",
    "write_corpus",
    "validate_records",
]

SOURCES = ("pubmed_xml", "jsonl", "fixture")
STAGES = ("raw", "stage1", "stage2", "stage3", "segmented", "normalized")


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid records."""


@dataclass
class Section:
    label_raw: str = ""
    label_canonical: tuple[str, ...] = ("Others",)
    text: str = ""
    sentence_spans: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "label_raw": self.label_raw,
            "label_canonical": list(self.label_canonical),
            "text": self.text,
            "sentence_spans": [list(s) for s in self.sentence_spans],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Section":
        return cls(
            label_raw=d.get("label_raw", ""),
            label_canonical=tuple(d.get("label_canonical") or ["Others"]),
            text=d.get("text", ""),
            sentence_spans=tuple((int(a), int(b)) for a, b in d.get("sentence_spans", [])),
        )


@dataclass
class AbstractRecord:
    pmid: str
    title: str
    sections: list[Section] = field(default_factory=list)
    language: str | None = None
    source: str = "jsonl"

    def to_dict(self) -> dict:
        return {
            "pmid": self.pmid,
            "title": self.title,
            "language": self.language,
            "source": self.source,
            "sections": [s.to_dict() for s in self.sections],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AbstractRecord":
        return cls(
            pmid=d["pmid"],
            title=d["title"],
            sections=[Section.from_dict(s) for s in d.get("sections", [])],
            language=d.get("language"),
            source=d.get("source", "jsonl"),
        )

    def copy(self) -> "AbstractRecord":
        return replace(self, sections=[replace(s) for s in self.sections])


@dataclass(frozen=True)
class CorpusManifest:
    record_count: int
    stage: str
    content_digest: str

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "stage": self.stage,
            "content_digest": self.content_digest,
        }


@dataclass
class ParseResult:
    records: list[AbstractRecord]
    skipped: list[dict]


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def _element_text(el: ET.Element | None) -> str:
    if el is None:
        return ""
    return "".join(el.itertext())


def parse_pubmed_xml(data: bytes) -> ParseResult:
    """Parse a PubMed article-set document into records.

    Only pmid, title, abstract blocks (with their label attributes) and
    language are read. Articles missing a pmid, title, or abstract text are
    skipped and reported.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        offset = _line_col_to_offset(data, line, col)
        raise CorpusError(f"malformed XML at byte offset {offset} (line {line}, column {col}): {exc}") from exc

    records: list[AbstractRecord] = []
    skipped: list[dict] = []
    for i, article in enumerate(root.iter("PubmedArticle")):
        pmid = _element_text(article.find(".//MedlineCitation/PMID")).strip()
        title = _nfc(_element_text(article.find(".//Article/ArticleTitle")).strip())
        if not pmid or not title:
            skipped.append({"index": i, "pmid": pmid or None, "reason": "missing pmid or title"})
            continue
        sections = []
        for block in article.findall(".//Article/Abstract/AbstractText"):
            text = _nfc(_element_text(block).strip())
            if not text:
                continue
            label_raw = block.get("Label") or block.get("NlmCategory") or ""
            sections.append(Section(label_raw=_nfc(label_raw), text=text))
        if not sections:
            skipped.append({"index": i, "pmid": pmid, "reason": "no abstract text"})
            continue
        language = _element_text(article.find(".//Article/Language")).strip() or None
        records.append(
            AbstractRecord(pmid=pmid, title=title, sections=sections, language=language, source="pubmed_xml")
        )
    return ParseResult(records=records, skipped=skipped)


def _line_col_to_offset(data: bytes, line: int, col: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + col


def read_pubmed_file(path) -> bytes:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return fh.read()


def validate_records(records: list[AbstractRecord]) -> list[str]:
    """Return a list of invariant violations (empty when valid).

    Title-only records (empty section list) are permitted only for
    fixture-sourced records; XML- and JSONL-sourced records carry text.
    """
    violations = []
    seen: dict[str, int] = {}
    for i, rec in enumerate(records):
        where = f"record {i} (pmid={rec.pmid!r})"
        if not rec.pmid:
            violations.append(f"{where}: empty pmid")
        elif rec.pmid in seen:
            violations.append(f"{where}: duplicate pmid, first at record {seen[rec.pmid]}")
        else:
            seen[rec.pmid] = i
        if not rec.title:
            violations.append(f"{where}: empty title")
        if rec.source not in SOURCES:
            violations.append(f"{where}: unknown source {rec.source!r}")
        if not rec.sections and rec.source != "fixture":
            violations.append(f"{where}: no sections (title-only records must have source 'fixture')")
        for j, sec in enumerate(rec.sections):
            prev_end = 0
            for span in sec.sentence_spans:
                if span[0] < prev_end or span[1] > len(sec.text) or span[0] >= span[1]:
                    violations.append(f"{where}: section {j} has invalid sentence span {span}")
                    break
                prev_end = span[1]
    return violations


def record_to_line(record: AbstractRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_corpus(records: list[AbstractRecord], path, stage: str = "raw") -> CorpusManifest:
    violations = validate_records(records)
    if violations:
        raise CorpusError("invalid records:\n" + "\n".join(violations))
    payload = "".join(record_to_line(r) + "\n" for r in records).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(payload)
    digest = hashlib.sha256(payload).hexdigest()
    return CorpusManifest(record_count=len(records), stage=stage, content_digest=digest)


def read_corpus(path) -> list[AbstractRecord]:
    records = []
    pmid_lines: dict[str, list[int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                rec = AbstractRecord.from_dict(d)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: malformed record on line {lineno}: {exc}") from exc
            pmid_lines.setdefault(rec.pmid, []).append(lineno)
            records.append(rec)
    duplicates = {p: lines for p, lines in pmid_lines.items() if len(lines) > 1}
    if duplicates:
        detail = "; ".join(
            f"pmid {p!r} on lines {' and '.join(map(str, lines))}" for p, lines in sorted(duplicates.items())
        )
        raise CorpusError(f"{path}: duplicate pmids: {detail}")
    violations = validate_records(records)
    if violations:
        raise CorpusError(f"{path}: invalid records:\n" + "\n".join(violations))
    return records


def write_manifest(manifest: CorpusManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
