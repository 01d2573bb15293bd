"""HTTP boundary serving annotation tasks and persisting submissions.

A thin layer: every state change flows through the annotation store, so
killing and restarting the service after any submit loses nothing. Task
order is deterministic (pmid ascending, numeric-aware), optionally a
seeded per-annotator shuffle.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .annotation import AnnotationError, AnnotationStore, agreement_report
from .evaluate import best_sentence
from .records import AbstractRecord
from .textproc import extract_abbreviations
from .titles import parse_title

__all__ = ["ServiceConfig", "create_app", "task_view"]


@dataclass
class ServiceConfig:
    suggest: bool = True
    max_rationales: int = 0  # 0 = unlimited
    polarity_only: bool = False
    shuffle_seed: int | None = None
    ui_dir: str | None = None
    show_title_polarity: bool = True


def _pmid_sort_key(pmid: str):
    return (0, int(pmid), "") if pmid.isdigit() else (1, 0, pmid)


def task_view(record: AbstractRecord, config: ServiceConfig) -> dict:
    """JSON view of one abstract as display units the UI can render."""
    sections = []
    for si, sec in enumerate(record.sections):
        sentences = [
            {"id": [si, qi], "start": start, "end": end, "text": sec.text[start:end]}
            for qi, (start, end) in enumerate(sec.sentence_spans)
        ]
        sections.append(
            {
                "label_raw": sec.label_raw,
                "label_canonical": list(sec.label_canonical),
                "text": sec.text,
                "sentences": sentences,
            }
        )
    title_match = None
    if config.show_title_polarity:
        parse = parse_title(record.title)
        if parse is not None:
            phrase = re.compile(
                r"(positive|negative|no|neutral)\s+(effect|impact|influence)\b", re.IGNORECASE
            ).match(record.title, parse.match_start)
            end = phrase.end() if phrase else parse.match_start
            title_match = {"polarity": parse.polarity, "start": parse.match_start, "end": end}
    suggested = None
    if config.suggest:
        hit = best_sentence(record, {"Results", "Conclusions"})
        if hit is not None:
            suggested = [hit.section_index, hit.sentence_index]
    abbreviations = [
        {"short": p.short_form, "long": p.long_form}
        for sec in record.sections
        for p in extract_abbreviations(sec.text)
    ]
    return {
        "pmid": record.pmid,
        "title": record.title,
        "title_match": title_match,
        "sections": sections,
        "abbreviations": abbreviations,
        "suggested_sentence": suggested,
        "max_rationales": config.max_rationales,
        "polarity_only": config.polarity_only,
    }


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>effectcorpus annotator</title></head>
<body><h1>effectcorpus annotation service</h1>
<p>No UI bundle is configured. The JSON API is live under <code>/api/</code>;
start the server with <code>--ui &lt;dir&gt;</code> to serve the frontend.</p>
</body></html>
"""


def create_app(
    corpus: list[AbstractRecord],
    store: AnnotationStore,
    config: ServiceConfig | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="effectcorpus annotation service")
    ordered = sorted(corpus, key=lambda r: _pmid_sort_key(r.pmid))
    by_pmid = {r.pmid: r for r in ordered}

    def order_for(annotator: str) -> list[AbstractRecord]:
        if config.shuffle_seed is None:
            return ordered
        digest = hashlib.sha256(annotator.encode("utf-8")).hexdigest()
        rng = random.Random(config.shuffle_seed ^ int(digest[:8], 16))
        shuffled = list(ordered)
        rng.shuffle(shuffled)
        return shuffled

    def progress_for(annotator: str) -> dict:
        return {"done": len(store.latest(annotator)), "total": len(ordered)}

    @app.get("/api/task/next")
    def next_task(annotator: str = ""):
        if not annotator:
            return _error(400, "missing_annotator", "query parameter 'annotator' is required")
        done = store.latest(annotator)
        for rec in order_for(annotator):
            if rec.pmid not in done:
                return {"done": False, "task": task_view(rec, config), "progress": progress_for(annotator)}
        return {"done": True, "task": None, "progress": progress_for(annotator)}

    @app.get("/api/abstracts/{pmid}")
    def get_abstract(pmid: str):
        rec = by_pmid.get(pmid)
        if rec is None:
            return _error(404, "unknown_pmid", f"no abstract with pmid {pmid!r}")
        return task_view(rec, config)

    @app.post("/api/annotations")
    async def submit(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_json", "request body must be a JSON object")
        if not isinstance(body, dict):
            return _error(400, "bad_json", "request body must be a JSON object")
        annotator = body.get("annotator_id") or ""
        try:
            rec = store.record_annotation(
                pmid=str(body.get("pmid", "")),
                annotator_id=str(annotator),
                polarity=str(body.get("polarity", "")),
                rationale_sentences=body.get("rationale_sentences", []),
                note=body.get("note"),
            )
        except AnnotationError as exc:
            return _error(400, "rejected", str(exc))
        return {"seq": rec.seq, "record": rec.to_dict(), "progress": progress_for(str(annotator))}

    @app.get("/api/stats")
    def stats():
        class_counts = {"positive": 0, "negative": 0, "neutral": 0}
        for rec in ordered:
            parse = parse_title(rec.title)
            if parse is not None:
                class_counts[parse.polarity] += 1
        annotators = store.annotators()
        agreement = None
        if len(annotators) >= 2:
            agreement = agreement_report(store, annotators[0], annotators[1]).to_dict()
        return {
            "corpus_size": len(ordered),
            "class_counts": class_counts,
            "annotators": {a: progress_for(a) for a in annotators},
            "agreement": agreement,
        }

    @app.get("/api/agreement")
    def agreement(a: str = "", b: str = ""):
        if not a or not b:
            return _error(400, "missing_annotator", "query parameters 'a' and 'b' are required")
        return agreement_report(store, a, b).to_dict()

    if config.ui_dir:
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app
