"""Sentence splitting, tokenization, stopwords, and abbreviation extraction.

All functions are pure and offset-preserving: spans always index into the
text that was passed in, so callers can reconstruct or highlight the
original string.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "Token",
    "AbbrevPair",
    "split_sentences",
    "tokenize",
    "extract_abbreviations",
    "default_stopwords",
    "load_stopwords",
]


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class AbbrevPair:
    short_form: str
    long_form: str
    span_short: tuple[int, int]
    span_long: tuple[int, int]


# Words are alphanumeric runs; hyphens join sub-words ("8-OH-Gua" is one
# token). Everything else is punctuation and dropped.
_TOKEN_RE = re.compile(r"\w+(?:-\w+)*", re.UNICODE)

# Sentence terminators: a run of . ! ? followed by whitespace or end of text.
_TERMINAL_RE = re.compile(r"[.!?]+(?=\s|$)")

# Dotted tokens that never end a sentence.
_NON_TERMINAL_ABBREVS = ("vs.", "e.g.", "i.e.", "fig.")


def _is_terminal(text: str, start: int, end: int) -> bool:
    """Decide whether the punctuation run text[start:end] ends a sentence."""
    if text[end - 1] != ".":
        return True
    # Single capital initial: "J. Smith"
    if end - start == 1 and start > 0 and text[start - 1].isupper():
        if start == 1 or not text[start - 2].isalnum():
            return False
    # Known non-terminal abbreviations
    lowered = text[:end].lower()
    if any(lowered.endswith(a) for a in _NON_TERMINAL_ABBREVS):
        return False
    # Decimal point: digits on both sides
    if start > 0 and text[start - 1].isdigit():
        after = end
        while after < len(text) and text[after].isspace():
            after += 1
        if after < len(text) and text[after].isdigit():
            return False
    return True


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Return ordered, non-overlapping sentence spans covering all
    non-whitespace text."""
    spans: list[tuple[int, int]] = []
    cursor = 0
    n = len(text)
    for match in _TERMINAL_RE.finditer(text):
        if match.start() < cursor:
            continue
        if not _is_terminal(text, match.start(), match.end()):
            continue
        start = cursor
        while start < match.end() and text[start].isspace():
            start += 1
        if start < match.end():
            spans.append((start, match.end()))
        cursor = match.end()
    # trailing text without a terminal
    start = cursor
    while start < n and text[start].isspace():
        start += 1
    end = n
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        spans.append((start, end))
    return spans


def tokenize(
    text: str,
    drop_stopwords: bool = False,
    stopwords: frozenset[str] | set[str] | None = None,
) -> list[Token]:
    """Word tokens with spans; punctuation dropped, hyphens token-internal."""
    if drop_stopwords and stopwords is None:
        stopwords = default_stopwords()
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        normalized = unicodedata.normalize("NFC", m.group(0)).lower()
        if drop_stopwords and normalized in stopwords:
            continue
        tokens.append(Token(m.group(0), normalized, m.start(), m.end()))
    return tokens


def content_token_set(
    text: str, stopwords: frozenset[str] | set[str] | None = None
) -> set[str]:
    """Normalized token set with stopwords and punctuation removed."""
    return {t.normalized for t in tokenize(text, drop_stopwords=True, stopwords=stopwords)}


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    with resources.files("effectcorpus.data").joinpath("stopwords.txt").open(
        "r", encoding="utf-8"
    ) as fh:
        return frozenset(_parse_wordlist(fh.read()))


def load_stopwords(path) -> frozenset[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(_parse_wordlist(fh.read()))


def _parse_wordlist(content: str) -> list[str]:
    words = []
    for line in content.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.append(line)
    return words


# --- abbreviation extraction --------------------------------------------

_PAREN_RE = re.compile(r"\(([^()]*)\)")
_VOWELS = set("aeiou")


def _alnum_chars(s: str) -> list[str]:
    return [c.lower() for c in s if c.isalnum()]


def _is_candidate_short_form(inner: str) -> bool:
    inner = inner.strip()
    if not (2 <= len(inner) <= 10):
        return False
    if len(inner.split()) > 2:
        return False
    if not any(c.isalpha() for c in inner):
        return False
    return bool(inner) and inner[0].isalnum()


def chars_align(short_form: str, long_form: str) -> bool:
    """Check the alignment property: the short form's first alphanumeric
    starts a word of the long form, and the remaining alphanumerics occur
    in order, where an inner vowel may go unmatched (chemical short forms
    such as 8-OH-Gua abbreviate morphemes, not letter sequences).
    """
    chars = _alnum_chars(short_form)
    if not chars:
        return False
    lowered = long_form.lower()
    starts = [
        i
        for i, c in enumerate(lowered)
        if c == chars[0] and (i == 0 or not lowered[i - 1].isalnum())
    ]
    return any(_subseq_with_vowel_skips(chars[1:], lowered[i + 1 :]) for i in starts)


def _subseq_with_vowel_skips(chars: list[str], text: str) -> bool:
    if not chars:
        return True
    memo: dict[tuple[int, int], bool] = {}

    def go(i: int, j: int) -> bool:
        if i == len(chars):
            return True
        key = (i, j)
        if key in memo:
            return memo[key]
        ok = False
        k = text.find(chars[i], j)
        if k >= 0:
            ok = go(i + 1, k + 1)
        if not ok and chars[i] in _VOWELS:
            ok = go(i + 1, j)
        memo[key] = ok
        return ok

    return go(0, 0)


def _find_long_form(short_form: str, context: str) -> tuple[int, int] | None:
    """Shortest word-suffix of `context` aligned with the short form.

    Returns a span within `context`, or None. The suffix must begin at a
    word whose first alphanumeric equals the short form's first character,
    and the word count is capped as in classic short/long-form pairing.
    """
    chars = _alnum_chars(short_form)
    if not chars:
        return None
    max_words = min(len(chars) + 5, 2 * len(chars))
    words = list(re.finditer(r"\S+", context))
    if not words:
        return None
    end = words[-1].end()
    for w in reversed(words[-max_words:]):
        chunk = w.group(0)
        offset = next((k for k, c in enumerate(chunk) if c.isalnum()), None)
        if offset is None:
            continue
        start = w.start() + offset
        if chunk[offset].lower() != chars[0]:
            continue
        candidate = context[start:end]
        if len(candidate) < len(short_form):
            continue
        if chars_align(short_form, candidate):
            return (start, end)
    return None


def extract_abbreviations(text: str) -> list[AbbrevPair]:
    """Find (short form, long form) pairs defined by parentheses.

    For each parenthesized candidate the long form is searched leftward
    within the same sentence; at most one pair per parenthesis.
    """
    pairs = []
    for s_start, s_end in split_sentences(text):
        sentence = text[s_start:s_end]
        for m in _PAREN_RE.finditer(sentence):
            inner = m.group(1).strip()
            if not _is_candidate_short_form(inner):
                continue
            context = sentence[: m.start()].rstrip()
            span = _find_long_form(inner, context)
            if span is None:
                continue
            long_form = context[span[0] : span[1]]
            inner_off = m.start(1) + (m.group(1).index(inner) if inner else 0)
            pairs.append(
                AbbrevPair(
                    short_form=inner,
                    long_form=long_form,
                    span_short=(s_start + inner_off, s_start + inner_off + len(inner)),
                    span_long=(s_start + span[0], s_start + span[1]),
                )
            )
    return pairs
