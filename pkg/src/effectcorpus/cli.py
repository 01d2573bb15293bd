"""Command-line entry point dispatching the pipeline verbs and the service.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error. All
randomness flows from --seed flags; rerunning a verb on identical inputs
produces byte-identical outputs.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import annotation, classify, concepts, evaluate, records, segments, titles

__all__ = ["main", "run"]


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="effectcorpus", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse PubMed XML into a canonical JSONL corpus")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, help="PubMed XML file(s), optionally .gz")
    p.add_argument("--out", required=True)
    p.add_argument("--english-only", action="store_true", help="keep only records with language 'eng'")

    p = sub.add_parser("filter", help="apply the staged title filter")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--stage", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--lexicon", help="exclusion lexicon file (default: packaged)")
    p.add_argument("--out", required=True)
    p.add_argument("--audit", help="write per-record decisions to this JSONL file")

    p = sub.add_parser("tabulate", help="print the three per-stage count tables")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--json", action="store_true", help="print machine-readable JSON instead of text")

    p = sub.add_parser("segment", help="detect sections, map labels, fill sentence spans")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--label-map", help="raw-label synonym table (default: packaged)")
    p.add_argument("--jobs", type=int, default=1, help="record-parallel worker processes")

    p = sub.add_parser("abbrev", help="extract abbreviation pairs to TSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="record-parallel worker processes")

    p = sub.add_parser("normalize", help="tag title concepts and rewrite mentions as X_i")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dict", dest="dictionary", required=True, help="concept dictionary TSV")
    p.add_argument("--groups", help="comma-separated semantic groups filter")
    p.add_argument("--import", dest="imported", help="precomputed concept annotations JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--audit", required=True)

    p = sub.add_parser("train", help="train a classifier on a segmented corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--text-scope", default="full", help="'full', 'best-sentence', or comma-separated labels")
    p.add_argument("--model-kind", choices=("mnb", "bnb", "svm"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--include-title", action="store_true")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("predict", help="classify records with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="TSV: pmid, predicted label, per-class scores")

    p = sub.add_parser("baseline", help="run the majority or signal-phrase baseline")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=("majority", "signal"), required=True)

    p = sub.add_parser("eval", help="run a cross-validated experiment matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--matrix", required=True, help="JSON file enumerating experiment descriptors")
    p.add_argument("--out", help="write the full report JSON here")

    p = sub.add_parser("serve", help="start the annotation service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--ui", help="static UI bundle directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--no-suggest", action="store_true", help="disable best-sentence suggestions")
    p.add_argument("--max-rationales", type=int, default=0)
    p.add_argument("--polarity-only", action="store_true")
    p.add_argument("--shuffle-seed", type=int)
    p.add_argument(
        "--hide-title-polarity", action="store_true", help="do not highlight the title's polarity phrase"
    )

    p = sub.add_parser("agreement", help="inter-annotator agreement from a store")
    p.add_argument("--store", required=True)
    p.add_argument("--annotators", required=True, help="two annotator ids, comma-separated")

    p = sub.add_parser("export-gold", help="export the gold corpus from a store")
    p.add_argument("--store", required=True)
    p.add_argument("--require-agreement", action="store_true")
    p.add_argument("--out", required=True)

    return parser


def _lexicon(path) -> titles.ExclusionLexicon:
    return titles.ExclusionLexicon.from_file(path) if path else titles.ExclusionLexicon.default()


def _segment_one(rec, label_map):
    return segments.fill_sentence_spans(segments.detect_sections(rec, label_map))


def _abbrev_one(rec):
    return [(rec.pmid, p.short_form, p.long_form) for p in concepts.record_abbreviations(rec)]


def _map_records(fn, items, jobs: int):
    """Order-preserving record map; jobs > 1 uses worker processes."""
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    import multiprocessing

    with multiprocessing.Pool(processes=min(jobs, len(items))) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (jobs * 4)))


def _cmd_ingest(args) -> int:
    all_records = []
    total_skipped = 0
    for path in args.inputs:
        result = records.parse_pubmed_xml(records.read_pubmed_file(path))
        all_records.extend(result.records)
        total_skipped += len(result.skipped)
        for skip in result.skipped:
            print(f"skipped article {skip['index']} ({skip.get('pmid')}): {skip['reason']}", file=sys.stderr)
    if args.english_only:
        all_records = [r for r in all_records if r.language == "eng"]
    all_records.sort(key=lambda r: r.pmid)
    manifest = records.write_corpus(all_records, args.out, stage="raw")
    records.write_manifest(manifest, args.out + ".manifest.json")
    print(f"ingested {manifest.record_count} records ({total_skipped} skipped) -> {args.out}")
    return 0


def _cmd_filter(args) -> int:
    corpus = records.read_corpus(args.input)
    kept, audit = titles.filter_corpus(corpus, titles.Stage(args.stage), _lexicon(args.lexicon))
    manifest = records.write_corpus(kept, args.out, stage=f"stage{args.stage}")
    records.write_manifest(manifest, args.out + ".manifest.json")
    if args.audit:
        with open(args.audit, "w", encoding="utf-8") as fh:
            for pmid, decision in audit:
                fh.write(
                    json.dumps(
                        {
                            "pmid": pmid,
                            "stage_reached": decision.stage_reached.label(),
                            "rejection_reason": decision.rejection_reason,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
    print(f"kept {len(kept)}/{len(corpus)} records at stage {args.stage} -> {args.out}")
    return 0


def _cmd_tabulate(args) -> int:
    corpus = records.read_corpus(args.input)
    table = titles.tabulate(corpus, _lexicon(args.lexicon))
    if args.json:
        print(json.dumps(table.to_json(), sort_keys=True, indent=2))
    else:
        print(table.render_text())
    return 0


def _cmd_segment(args) -> int:
    import functools

    corpus = records.read_corpus(args.input)
    label_map = segments.LabelMap.from_file(args.label_map) if args.label_map else segments.LabelMap.default()
    out = _map_records(functools.partial(_segment_one, label_map=label_map), corpus, args.jobs)
    manifest = records.write_corpus(out, args.out, stage="segmented")
    records.write_manifest(manifest, args.out + ".manifest.json")
    print(f"segmented {manifest.record_count} records -> {args.out}")
    return 0


def _cmd_abbrev(args) -> int:
    corpus = records.read_corpus(args.input)
    n = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for rows in _map_records(_abbrev_one, corpus, args.jobs):
            for pmid, short, long_form in rows:
                fh.write(f"{pmid}\t{short}\t{long_form}\n")
                n += 1
    print(f"extracted {n} abbreviation pairs -> {args.out}")
    return 0


def _cmd_normalize(args) -> int:
    corpus = records.read_corpus(args.input)
    groups = set(args.groups.split(",")) if args.groups else None
    dictionary = concepts.load_dictionary(args.dictionary, groups)
    external = concepts.load_external_annotations(args.imported, groups) if args.imported else {}
    out = []
    with open(args.audit, "w", encoding="utf-8") as audit_fh:
        for rec in corpus:
            imported_fields = concepts.locate_external_mentions(rec, external.get(rec.pmid, []))
            abbrevs = concepts.record_abbreviations(rec)
            tags = concepts.title_tags(rec, dictionary, abbrevs, imported_fields.get("title"))
            normalized, audit = concepts.normalize(rec, tags, dictionary, imported_fields)
            out.append(normalized)
            for entry in audit:
                audit_fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
    manifest = records.write_corpus(out, args.out, stage="normalized")
    records.write_manifest(manifest, args.out + ".manifest.json")
    print(f"normalized {manifest.record_count} records -> {args.out}")
    return 0


def _parse_scope(scope: str):
    if scope in ("full", "best-sentence"):
        return scope
    labels = [s.strip() for s in scope.split(",") if s.strip()]
    valid = {l.value for l in segments.CanonicalLabel}
    unknown = set(labels) - valid
    if unknown:
        raise records.CorpusError(f"unknown canonical labels in --text-scope: {sorted(unknown)}")
    return labels


def _cmd_train(args) -> int:
    corpus = records.read_corpus(args.input)
    kept, labels = evaluate.gold_labels(corpus)
    if len(kept) < len(corpus):
        print(f"dropped {len(corpus) - len(kept)} records without a polar title", file=sys.stderr)
    config = evaluate.ExperimentConfig(
        name="train",
        model_kind={"mnb": "multinomial_nb", "bnb": "bernoulli_nb", "svm": "linear_svm"}[args.model_kind],
        text_scope=_parse_scope(args.text_scope),
        include_title=args.include_title,
        alpha=args.alpha,
        lam=args.lam,
        epochs=args.epochs,
        min_df=args.min_df,
        seed=args.seed,
    )
    docs = [evaluate.document_tokens(r, config) for r in kept]
    vocab = classify.build_vocabulary(docs, min_df=config.min_df)
    mode = "binary" if config.model_kind == "bernoulli_nb" else "counts"
    vectors = [classify.vectorize(d, vocab, mode) for d in docs]
    if config.model_kind == "linear_svm":
        model = classify.train_linear_svm(
            vectors, labels, lam=config.lam, epochs=config.epochs, seed=config.seed, vocabulary=vocab
        )
    else:
        variant = "multinomial" if config.model_kind == "multinomial_nb" else "bernoulli"
        model = classify.train_nb(vectors, labels, variant, alpha=config.alpha, vocabulary=vocab)
    model.config.update({"text_scope": config.text_scope, "include_title": config.include_title})
    classify.save_model(model, args.out)
    print(f"trained {model.kind} on {len(kept)} records (V={len(vocab)}) -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = classify.load_model(args.model)
    corpus = records.read_corpus(args.input)
    config = evaluate.ExperimentConfig(
        model_kind=model.kind,
        text_scope=model.config.get("text_scope", "full"),
        include_title=model.config.get("include_title", False),
    )
    mode = "binary" if model.kind == "bernoulli_nb" else "counts"
    with open(args.out, "w", encoding="utf-8") as fh:
        for rec in corpus:
            vec = classify.vectorize(evaluate.document_tokens(rec, config), model.vocabulary, mode)
            label, scores = classify.predict(model, vec)
            score_str = ",".join(f"{c}={scores[c]:.6f}" for c in model.classes)
            fh.write(f"{rec.pmid}\t{label}\t{score_str}\n")
    print(f"predicted {len(corpus)} records -> {args.out}")
    return 0


def _cmd_baseline(args) -> int:
    corpus = records.read_corpus(args.input)
    kept, labels = evaluate.gold_labels(corpus)
    if not labels:
        raise records.CorpusError("no records with a parsable title polarity")
    majority_label, majority_acc = evaluate.majority_baseline(labels)
    if args.kind == "majority":
        result = {
            "kind": "majority",
            "predicted_label": majority_label,
            "accuracy": majority_acc,
            "n_records": len(labels),
            "reference_accuracy": evaluate.REFERENCE_ACCURACIES["majority_baseline"],
        }
        print(f"majority baseline: predicts {majority_label!r}, accuracy {majority_acc * 100:.2f}%")
    else:
        correct = sum(
            evaluate.signal_phrase_baseline(rec, majority_label) == lab for rec, lab in zip(kept, labels)
        )
        acc = correct / len(labels)
        result = {
            "kind": "signal",
            "fallback_label": majority_label,
            "accuracy": acc,
            "n_records": len(labels),
            "reference_accuracy": evaluate.REFERENCE_ACCURACIES["signal_phrase_baseline"],
        }
        print(f"signal-phrase baseline: accuracy {acc * 100:.2f}% (fallback {majority_label!r})")
    print(json.dumps(result, sort_keys=True))
    return 0


def _cmd_eval(args) -> int:
    corpus = records.read_corpus(args.input)
    kept, labels = evaluate.gold_labels(corpus)
    with open(args.matrix, "r", encoding="utf-8") as fh:
        matrix = json.load(fh)
    reports = evaluate.run_matrix(kept, labels, matrix)
    print(evaluate.render_matrix_table(reports))
    if args.out:
        payload = [json.loads(r.to_json()) for r in reports]
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    corpus = records.read_corpus(args.corpus)
    store = annotation.AnnotationStore(
        args.store, corpus=corpus, polarity_only=args.polarity_only, max_rationales=args.max_rationales
    )
    config = ServiceConfig(
        suggest=not args.no_suggest,
        max_rationales=args.max_rationales,
        polarity_only=args.polarity_only,
        shuffle_seed=args.shuffle_seed,
        ui_dir=args.ui,
        show_title_polarity=not args.hide_title_polarity,
    )
    uvicorn.run(create_app(corpus, store, config), host=args.host, port=args.port)
    return 0


def _cmd_agreement(args) -> int:
    names = [a.strip() for a in args.annotators.split(",") if a.strip()]
    if len(names) != 2:
        raise records.CorpusError("--annotators expects exactly two comma-separated ids")
    store = annotation.AnnotationStore(args.store)
    report = annotation.agreement_report(store, names[0], names[1])
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0


def _cmd_export_gold(args) -> int:
    store = annotation.AnnotationStore(args.store)
    gold = annotation.export_gold(store, require_agreement=args.require_agreement)
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in gold:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"exported {len(gold)} gold rows -> {args.out}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "filter": _cmd_filter,
    "tabulate": _cmd_tabulate,
    "segment": _cmd_segment,
    "abbrev": _cmd_abbrev,
    "normalize": _cmd_normalize,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "baseline": _cmd_baseline,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "agreement": _cmd_agreement,
    "export-gold": _cmd_export_gold,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.verb](args)
    except (records.CorpusError, annotation.AnnotationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())
