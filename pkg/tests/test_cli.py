"""CLI dispatch, exit codes, and pipeline determinism."""

import json
from pathlib import Path

import pytest

from conftest import FIXTURES, polarity_corpus
from effectcorpus.cli import run
from effectcorpus.records import write_corpus


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDispatchAndExitCodes:
    def test_help_exits_zero(self, capsys):
        for verb in ("", "ingest", "filter", "tabulate", "train", "serve", "export-gold"):
            argv = [verb, "--help"] if verb else ["--help"]
            code, out, _ = invoke(capsys, *argv)
            assert code == 0
            assert "usage" in out.lower()

    def test_unknown_verb_exits_one(self, capsys):
        code, _, err = invoke(capsys, "frobnicate")
        assert code == 1
        assert "usage" in err.lower()

    def test_invalid_stage_exits_one(self, capsys, tmp_path):
        code, _, err = invoke(capsys, "filter", "--in", "x.jsonl", "--stage", "4", "--out", "y.jsonl")
        assert code == 1
        assert "usage" in err.lower()

    def test_missing_input_file_is_io_error(self, capsys, tmp_path):
        code, _, err = invoke(capsys, "tabulate", "--in", str(tmp_path / "nope.jsonl"))
        assert code == 2

    def test_validation_error_exits_one(self, capsys, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json}\n", encoding="utf-8")
        code, _, err = invoke(capsys, "tabulate", "--in", str(bad))
        assert code == 1
        assert "error" in err.lower()


class TestVerbs:
    def test_ingest_and_tabulate(self, capsys, tmp_path):
        out = tmp_path / "corpus.jsonl"
        code, _, _ = invoke(capsys, "ingest", "--in", str(FIXTURES / "corpus30.xml"), "--out", str(out))
        assert code == 0
        assert out.exists() and Path(str(out) + ".manifest.json").exists()
        code, table, _ = invoke(capsys, "tabulate", "--in", str(out))
        assert code == 0
        assert "Pattern in the title" in table
        code, js, _ = invoke(capsys, "tabulate", "--in", str(out), "--json")
        data = json.loads(js)
        assert data["stage3"]["total"]["total"] == 30

    def test_ingest_english_only(self, capsys, tmp_path):
        xml = (
            "<PubmedArticleSet>"
            "<PubmedArticle><MedlineCitation><PMID>1</PMID><Article>"
            "<ArticleTitle>No effect of a on b</ArticleTitle>"
            "<Abstract><AbstractText>Body one.</AbstractText></Abstract>"
            "<Language>eng</Language></Article></MedlineCitation></PubmedArticle>"
            "<PubmedArticle><MedlineCitation><PMID>2</PMID><Article>"
            "<ArticleTitle>No effect of c on d</ArticleTitle>"
            "<Abstract><AbstractText>Body two.</AbstractText></Abstract>"
            "<Language>fre</Language></Article></MedlineCitation></PubmedArticle>"
            "</PubmedArticleSet>"
        )
        src = tmp_path / "mixed.xml"
        src.write_text(xml, encoding="utf-8")
        out = tmp_path / "eng.jsonl"
        code, _, _ = invoke(capsys, "ingest", "--in", str(src), "--out", str(out), "--english-only")
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 and '"pmid":"1"' in lines[0]
        # without the flag both are kept, the non-English one flagged
        out_all = tmp_path / "all.jsonl"
        invoke(capsys, "ingest", "--in", str(src), "--out", str(out_all))
        assert len(out_all.read_text().splitlines()) == 2

    def test_baseline_majority_on_published_histogram(self, capsys, tmp_path):
        corpus = tmp_path / "hist.jsonl"
        write_corpus(polarity_corpus(162, 154, 434), corpus)
        code, out, _ = invoke(capsys, "baseline", "--in", str(corpus), "--kind", "majority")
        assert code == 0
        assert "57.87%" in out
        payload = json.loads(out.strip().splitlines()[-1])
        assert payload["predicted_label"] == "neutral"
        assert abs(payload["accuracy"] * 100 - 57.87) < 0.01

    def test_abbrev_tsv(self, capsys, tmp_path):
        corpus = tmp_path / "c.jsonl"
        invoke(capsys, "ingest", "--in", str(FIXTURES / "achd.xml"), "--out", str(corpus))
        out = tmp_path / "abbrev.tsv"
        code, _, _ = invoke(capsys, "abbrev", "--in", str(corpus), "--out", str(out))
        assert code == 0
        assert out.read_text().strip() == "25391256\tACHD\tadults with congenital heart disease"

    def test_filter_audit(self, capsys, tmp_path):
        corpus = tmp_path / "c.jsonl"
        invoke(capsys, "ingest", "--in", str(FIXTURES / "two_articles.xml"), "--out", str(corpus))
        kept = tmp_path / "kept.jsonl"
        audit = tmp_path / "audit.jsonl"
        code, _, _ = invoke(
            capsys, "filter", "--in", str(corpus), "--stage", "3", "--out", str(kept), "--audit", str(audit)
        )
        assert code == 0
        decisions = [json.loads(l) for l in audit.read_text().splitlines()]
        assert len(decisions) == 2
        assert all(d["stage_reached"] == "stage3" for d in decisions)

    def test_train_and_predict(self, capsys, tmp_path):
        corpus = tmp_path / "c.jsonl"
        seg = tmp_path / "seg.jsonl"
        invoke(capsys, "ingest", "--in", str(FIXTURES / "corpus30.xml"), "--out", str(corpus))
        invoke(capsys, "segment", "--in", str(corpus), "--out", str(seg))
        model = tmp_path / "model.json"
        code, _, _ = invoke(
            capsys, "train", "--in", str(seg), "--model-kind", "mnb", "--out", str(model)
        )
        assert code == 0
        preds = tmp_path / "preds.tsv"
        code, _, _ = invoke(capsys, "predict", "--model", str(model), "--in", str(seg), "--out", str(preds))
        assert code == 0
        rows = [l.split("\t") for l in preds.read_text().splitlines()]
        assert len(rows) == 30
        assert all(r[1] in ("positive", "negative", "neutral") for r in rows)

    def test_agreement_and_export_gold(self, capsys, tmp_path, corpus30):
        from effectcorpus.annotation import AnnotationStore

        store_path = tmp_path / "log.jsonl"
        store = AnnotationStore(store_path, corpus=corpus30)
        for rec in corpus30[:3]:
            store.record_annotation(rec.pmid, "alice", "neutral", [(0, 0)])
            store.record_annotation(rec.pmid, "bob", "neutral", [(0, 0)])
        code, out, _ = invoke(capsys, "agreement", "--store", str(store_path), "--annotators", "alice,bob")
        assert code == 0
        assert json.loads(out)["kappa_polarity"] == 1.0
        gold = tmp_path / "gold.jsonl"
        code, _, _ = invoke(capsys, "export-gold", "--store", str(store_path), "--out", str(gold))
        assert code == 0
        assert len(gold.read_text().splitlines()) == 3

    def test_ingest_merges_multiple_inputs(self, capsys, tmp_path):
        out = tmp_path / "merged.jsonl"
        code, _, _ = invoke(
            capsys,
            "ingest",
            "--in", str(FIXTURES / "achd.xml"), str(FIXTURES / "toner.xml"),
            "--out", str(out),
        )
        assert code == 0
        pmids = [json.loads(l)["pmid"] for l in out.read_text().splitlines()]
        assert pmids == sorted(pmids) and len(pmids) == 2

    def test_normalize_with_imported_annotations(self, capsys, tmp_path):
        corpus = tmp_path / "c.jsonl"
        invoke(capsys, "ingest", "--in", str(FIXTURES / "toner.xml"), "--out", str(corpus))
        seg = tmp_path / "seg.jsonl"
        invoke(capsys, "segment", "--in", str(corpus), "--out", str(seg))
        # external annotation covering "toner" in the title (flat layout:
        # title then section texts joined by newlines)
        rec = json.loads(seg.read_text().splitlines()[0])
        at = rec["title"].index("toner")
        imports = tmp_path / "imports.jsonl"
        imports.write_text(
            json.dumps(
                {"pmid": rec["pmid"], "start": at, "end": at + 5, "concept_id": "C_T", "semantic_group": "Objects"}
            )
            + "\n",
            encoding="utf-8",
        )
        empty_dict = tmp_path / "empty.tsv"
        empty_dict.write_text("", encoding="utf-8")
        norm = tmp_path / "norm.jsonl"
        audit = tmp_path / "audit.jsonl"
        code, _, _ = invoke(
            capsys,
            "normalize",
            "--in", str(seg),
            "--dict", str(empty_dict),
            "--import", str(imports),
            "--out", str(norm),
            "--audit", str(audit),
        )
        assert code == 0
        normalized = json.loads(norm.read_text().splitlines()[0])
        assert "X_1" in normalized["title"]
        assert len(audit.read_text().splitlines()) == 1

    def test_jobs_flag_gives_identical_output(self, capsys, tmp_path):
        corpus = tmp_path / "c.jsonl"
        invoke(capsys, "ingest", "--in", str(FIXTURES / "corpus30.xml"), "--out", str(corpus))
        seq = tmp_path / "seq.jsonl"
        par = tmp_path / "par.jsonl"
        invoke(capsys, "segment", "--in", str(corpus), "--out", str(seq))
        invoke(capsys, "segment", "--in", str(corpus), "--out", str(par), "--jobs", "2")
        assert seq.read_bytes() == par.read_bytes()


def run_pipeline(capsys, workdir: Path) -> dict[str, bytes]:
    """ingest -> filter stage3 -> segment -> normalize -> eval, returning
    the bytes of every produced artifact."""
    raw = workdir / "raw.jsonl"
    kept = workdir / "stage3.jsonl"
    audit = workdir / "audit.jsonl"
    seg = workdir / "segmented.jsonl"
    norm = workdir / "normalized.jsonl"
    norm_audit = workdir / "norm_audit.jsonl"
    report = workdir / "report.json"
    steps = [
        ("ingest", "--in", str(FIXTURES / "corpus30.xml"), "--out", str(raw)),
        ("filter", "--in", str(raw), "--stage", "3", "--out", str(kept), "--audit", str(audit)),
        ("segment", "--in", str(kept), "--out", str(seg)),
        (
            "normalize",
            "--in", str(seg),
            "--dict", str(FIXTURES / "concepts30.tsv"),
            "--out", str(norm),
            "--audit", str(norm_audit),
        ),
        ("eval", "--in", str(norm), "--matrix", str(FIXTURES / "matrix_small.json"), "--out", str(report)),
    ]
    for argv in steps:
        code, _, err = invoke(capsys, *argv)
        assert code == 0, (argv, err)
    return {
        p.name: p.read_bytes()
        for p in (raw, kept, audit, seg, norm, norm_audit, report)
    }


class TestPipelineDeterminism:
    @pytest.fixture(autouse=True)
    def _mk(self, tmp_path):
        (tmp_path / "run1").mkdir()
        (tmp_path / "run2").mkdir()

    def test_two_runs_byte_identical(self, capsys, tmp_path):
        first = run_pipeline(capsys, tmp_path / "run1")
        second = run_pipeline(capsys, tmp_path / "run2")
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"
