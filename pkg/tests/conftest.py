import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from effectcorpus import records, segments

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def _load_xml(name: str):
    result = records.parse_pubmed_xml((FIXTURES / name).read_bytes())
    assert not result.skipped
    return result.records


@pytest.fixture(scope="session")
def achd_record():
    """Structured fixture abstract (pmid 25391256), segmented with spans."""
    rec = _load_xml("achd.xml")[0]
    return segments.fill_sentence_spans(segments.detect_sections(rec))


@pytest.fixture(scope="session")
def toner_record():
    """Unstructured fixture abstract (pmid 16195210), segmented with spans."""
    rec = _load_xml("toner.xml")[0]
    return segments.fill_sentence_spans(segments.detect_sections(rec))


@pytest.fixture(scope="session")
def corpus30():
    """30-record synthetic corpus, 10 per polarity, all passing stage 3."""
    recs = _load_xml("corpus30.xml")
    return [segments.fill_sentence_spans(segments.detect_sections(r)) for r in recs]


def make_title_only(pmid: str, title: str) -> records.AbstractRecord:
    return records.AbstractRecord(pmid=pmid, title=title, sections=[], source="fixture")


def polarity_corpus(n_positive: int, n_negative: int, n_neutral: int) -> list[records.AbstractRecord]:
    """Title-only records with the requested polarity histogram."""
    out = []
    pmid = 1
    for pol, n in (("Positive", n_positive), ("Negative", n_negative), ("No", n_neutral)):
        for i in range(n):
            out.append(make_title_only(str(pmid), f"{pol} effect of agent {pmid} on outcome {i}"))
            pmid += 1
    return out
