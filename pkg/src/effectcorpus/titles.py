"""Effect-title grammar and the three-stage corpus filter.

A matching title contains `[article] <polarity> <effect-word> of X <prep> Y`
with polarity in {positive, negative, no, neutral} ("no" and "neutral" both
count as neutral), effect word in {effect, impact, influence} and the
preposition in {on, in, for}. Stage 1 keeps titles with the phrase anywhere,
stage 2 additionally requires no exclusion-lexicon word in the title, and
stage 3 requires the phrase at the start of the title with a full X/Y parse.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .records import AbstractRecord
from .textproc import tokenize

__all__ = [
    "POLARITIES",
    "EFFECT_WORDS",
    "Stage",
    "TitleParse",
    "FilterDecision",
    "ExclusionLexicon",
    "parse_title",
    "classify_stage",
    "filter_corpus",
    "tabulate",
    "CountTable",
]

POLARITIES = ("positive", "negative", "neutral")
EFFECT_WORDS = ("effect", "impact", "influence")
PREPOSITIONS = ("on", "in", "for")

_POLARITY_MAP = {"positive": "positive", "negative": "negative", "no": "neutral", "neutral": "neutral"}

_PHRASE_RE = re.compile(r"\b(positive|negative|no|neutral)\s+(effect|impact|influence)\b", re.IGNORECASE)
_OF_RE = re.compile(r"\s+of\s+", re.IGNORECASE)
_PREP_RE = re.compile(r"\b(on|in|for)\b", re.IGNORECASE)
_ARTICLE_RE = re.compile(r"(the|an|a)\b\s*", re.IGNORECASE)
_STRIP_CHARS = "\"'“”‘’«»([{"


class Stage(enum.IntEnum):
    NONE = 0
    STAGE1 = 1
    STAGE2 = 2
    STAGE3 = 3

    def label(self) -> str:
        return "none" if self is Stage.NONE else f"stage{int(self)}"


@dataclass(frozen=True)
class TitleParse:
    polarity: str
    effect_word: str
    catalyst_x: str | None = None
    target_y: str | None = None
    preposition: str | None = None
    match_start: int = 0
    at_start: bool = False

    @property
    def is_full(self) -> bool:
        return bool(self.catalyst_x and self.target_y and self.preposition)


@dataclass(frozen=True)
class FilterDecision:
    stage_reached: Stage
    rejection_reason: str | None = None

    def reaches(self, stage: Stage | int) -> bool:
        return self.stage_reached >= stage


def _effective_start(title: str) -> int:
    """Offset of the first token after leading articles, quotes and brackets."""
    pos = 0
    n = len(title)
    while pos < n:
        if title[pos].isspace() or title[pos] in _STRIP_CHARS:
            pos += 1
            continue
        m = _ARTICLE_RE.match(title, pos)
        if m:
            pos = m.end()
            continue
        break
    return pos


def _clause_end(title: str, start: int) -> int:
    """First sentence-level ":" or "." at or after `start`; decimal points
    (digits on both sides) do not count."""
    for i in range(start, len(title)):
        c = title[i]
        if c == ":":
            return i
        if c == "." and not (
            i > 0 and title[i - 1].isdigit() and i + 1 < len(title) and title[i + 1].isdigit()
        ):
            return i
    return len(title)


def _parse_xy(title: str, after: int) -> tuple[str, str, str] | None:
    """Parse `of X <prep> Y` starting at `after`; None when not parsable."""
    of_match = _OF_RE.match(title, after)
    if not of_match:
        return None
    x_start = of_match.end()
    limit = _clause_end(title, x_start)
    prep_match = _PREP_RE.search(title, x_start, limit)
    if not prep_match:
        return None
    catalyst_x = title[x_start : prep_match.start()].strip()
    y_start = prep_match.end()
    # Y runs to the end of the title or the first sentence-level stop.
    target_y = title[y_start : _clause_end(title, y_start)].strip()
    if not catalyst_x or not target_y:
        return None
    return catalyst_x, target_y, prep_match.group(1).lower()


def parse_title(title: str) -> TitleParse | None:
    """Leftmost full grammar match, or a partial (polarity + effect word
    only) parse when the phrase never parses to X/Y. None when the phrase
    is absent entirely."""
    effective = _effective_start(title)
    partial: TitleParse | None = None
    for m in _PHRASE_RE.finditer(title):
        polarity = _POLARITY_MAP[m.group(1).lower()]
        effect_word = m.group(2).lower()
        at_start = m.start() == effective
        xy = _parse_xy(title, m.end())
        if xy:
            x, y, prep = xy
            return TitleParse(polarity, effect_word, x, y, prep, m.start(), at_start)
        if partial is None:
            partial = TitleParse(polarity, effect_word, match_start=m.start(), at_start=at_start)
    return partial


@dataclass(frozen=True)
class ExclusionLexicon:
    """Lowercase words/phrases excluded at stage 2; whole-token matching."""

    entries: frozenset[tuple[str, ...]]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("exclusion lexicon must be non-empty")

    @classmethod
    def from_words(cls, words) -> "ExclusionLexicon":
        entries = set()
        for w in words:
            toks = tuple(t.normalized for t in tokenize(w.lower()))
            if toks:
                entries.add(toks)
        return cls(frozenset(entries))

    @classmethod
    def from_file(cls, path) -> "ExclusionLexicon":
        words = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    words.append(line)
        return cls.from_words(words)

    @classmethod
    def default(cls) -> "ExclusionLexicon":
        return _default_lexicon()

    def matches(self, title: str) -> bool:
        tokens = [t.normalized for t in tokenize(title)]
        lengths = {len(e) for e in self.entries}
        for n in lengths:
            for i in range(len(tokens) - n + 1):
                if tuple(tokens[i : i + n]) in self.entries:
                    return True
        return False


@lru_cache(maxsize=1)
def _default_lexicon() -> ExclusionLexicon:
    with resources.files("effectcorpus.data").joinpath("exclusion_lexicon.txt").open(
        "r", encoding="utf-8"
    ) as fh:
        words = [l.split("#", 1)[0].strip() for l in fh]
    return ExclusionLexicon.from_words(w for w in words if w)


def classify_stage(title: str, lexicon: ExclusionLexicon | None = None) -> FilterDecision:
    lexicon = lexicon or ExclusionLexicon.default()
    parse = parse_title(title)
    if parse is None:
        return FilterDecision(Stage.NONE, "no_effect_phrase")
    if lexicon.matches(title):
        return FilterDecision(Stage.STAGE1, "exclusion_word")
    if not parse.at_start:
        return FilterDecision(Stage.STAGE2, "not_at_start")
    if not parse.is_full:
        return FilterDecision(Stage.STAGE2, "no_xy_parse")
    return FilterDecision(Stage.STAGE3)


def filter_corpus(
    records: list[AbstractRecord],
    target_stage: Stage | int,
    lexicon: ExclusionLexicon | None = None,
) -> tuple[list[AbstractRecord], list[tuple[str, FilterDecision]]]:
    """Keep records whose title reaches `target_stage`; audit covers all."""
    lexicon = lexicon or ExclusionLexicon.default()
    kept = []
    audit = []
    for rec in records:
        decision = classify_stage(rec.title, lexicon)
        audit.append((rec.pmid, decision))
        if decision.reaches(target_stage):
            kept.append(rec)
    return kept, audit


@dataclass
class CountTable:
    """Polarity-by-effect-word counts for each filter stage."""

    counts: dict[Stage, dict[tuple[str, str], int]] = field(default_factory=dict)

    def cell(self, stage: Stage, polarity: str, effect_word: str) -> int:
        return self.counts.get(stage, {}).get((polarity, effect_word), 0)

    def row_total(self, stage: Stage, polarity: str) -> int:
        return sum(self.cell(stage, polarity, w) for w in EFFECT_WORDS)

    def column_total(self, stage: Stage, effect_word: str) -> int:
        return sum(self.cell(stage, p, effect_word) for p in POLARITIES)

    def grand_total(self, stage: Stage) -> int:
        return sum(self.row_total(stage, p) for p in POLARITIES)

    def to_json(self) -> dict:
        out = {}
        for stage in (Stage.STAGE1, Stage.STAGE2, Stage.STAGE3):
            rows: dict = {}
            for p in POLARITIES:
                rows[p] = {w: self.cell(stage, p, w) for w in EFFECT_WORDS}
                rows[p]["total"] = self.row_total(stage, p)
            rows["total"] = {w: self.column_total(stage, w) for w in EFFECT_WORDS}
            rows["total"]["total"] = self.grand_total(stage)
            out[stage.label()] = rows
        return out

    def render_text(self) -> str:
        headers = {
            Stage.STAGE1: "Stage 1: effect phrase in the title",
            Stage.STAGE2: "Stage 2: without exclusion words",
            Stage.STAGE3: "Stage 3: phrase at the beginning of the title",
        }
        row_names = {"positive": "Positive", "negative": "Negative", "neutral": "No"}
        lines = []
        for stage in (Stage.STAGE1, Stage.STAGE2, Stage.STAGE3):
            lines.append(headers[stage])
            lines.append(
                f"{'Pattern in the title':<22}{'Effect of':>12}{'Impact of':>12}{'Influence of':>14}{'Total':>9}"
            )
            for p in POLARITIES:
                cells = [self.cell(stage, p, w) for w in EFFECT_WORDS]
                lines.append(
                    f"{row_names[p]:<22}{cells[0]:>12}{cells[1]:>12}{cells[2]:>14}{self.row_total(stage, p):>9}"
                )
            cols = [self.column_total(stage, w) for w in EFFECT_WORDS]
            lines.append(
                f"{'Total':<22}{cols[0]:>12}{cols[1]:>12}{cols[2]:>14}{self.grand_total(stage):>9}"
            )
            lines.append("")
        return "\n".join(lines)


def tabulate(records: list[AbstractRecord], lexicon: ExclusionLexicon | None = None) -> CountTable:
    lexicon = lexicon or ExclusionLexicon.default()
    table = CountTable()
    for rec in records:
        parse = parse_title(rec.title)
        if parse is None:
            continue
        decision = classify_stage(rec.title, lexicon)
        key = (parse.polarity, parse.effect_word)
        for stage in (Stage.STAGE1, Stage.STAGE2, Stage.STAGE3):
            if decision.reaches(stage):
                table.counts.setdefault(stage, {})
                table.counts[stage][key] = table.counts[stage].get(key, 0) + 1
    return table
