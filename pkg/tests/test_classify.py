"""Vocabulary, feature vectors, NB and SVM training, model round trips."""

import itertools
import math
import random

import pytest

import nb_oracle
from effectcorpus.classify import (
    FeatureVector,
    Vocabulary,
    build_vocabulary,
    label_order,
    load_model,
    predict,
    save_model,
    serialize_model,
    svm_objective,
    train_linear_svm,
    train_nb,
    vectorize,
)

VOCAB3 = Vocabulary(index={"t0": 0, "t1": 1, "t2": 2}, doc_freq={"t0": 1, "t1": 1, "t2": 1}, min_df=1)


def vec(counts, mode="counts") -> FeatureVector:
    return FeatureVector(pairs=tuple((i, float(c)) for i, c in enumerate(counts) if c), mode=mode)


class TestVocabulary:
    def test_min_df_two(self):
        v = build_vocabulary([["a", "b"], ["b", "c"]], min_df=2)
        assert set(v.index) == {"b"}

    def test_min_df_one(self):
        v = build_vocabulary([["a", "b"], ["b", "c"]], min_df=1)
        assert set(v.index) == {"a", "b", "c"}
        # df descending, then lexicographic
        assert v.index["b"] == 0 and v.index["a"] == 1 and v.index["c"] == 2

    def test_deterministic(self):
        docs = [["x", "y", "z"], ["y", "q"], ["z", "y"]]
        assert build_vocabulary(docs, 1).index == build_vocabulary(docs, 1).index

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_vocabulary([], 1)

    def test_vectorize_counts_and_binary(self):
        v = build_vocabulary([["a", "b", "a"]], 1)
        fv = vectorize(["a", "a", "b", "unseen"], v, "counts")
        assert dict(fv.pairs)[v.index["a"]] == 2.0
        fb = vectorize(["a", "a", "b"], v, "binary")
        assert all(x == 1.0 for _, x in fb.pairs)


class TestNaiveBayes:
    def test_toy_multinomial_matches_hand_computation(self):
        docs = [["good", "effect"], ["good", "outcome"], ["bad", "effect"]]
        labels = ["P", "P", "N"]
        vocab = build_vocabulary(docs, 1)
        vecs = [vectorize(d, vocab, "counts") for d in docs]
        model = train_nb(vecs, labels, "multinomial", alpha=1.0, vocabulary=vocab)
        label, scores = predict(model, vectorize(["good", "effect"], vocab, "counts"))
        assert label == "P"
        # closed form: posterior 27/35 for P, ratio 27:8
        assert math.exp(scores["P"]) == pytest.approx(27 / 35, abs=1e-12)
        assert math.exp(scores["P"]) / math.exp(scores["N"]) == pytest.approx(27 / 8, rel=1e-10)

    def test_symmetric_corpus_gives_half_half(self):
        vecs = [vec((1, 0, 0)), vec((1, 0, 0))]
        model = train_nb(vecs, ["A", "B"], "multinomial", 1.0, VOCAB3)
        _, scores = predict(model, vec((1, 0, 0)))
        assert math.exp(scores["A"]) == pytest.approx(0.5, abs=1e-12)
        assert math.exp(scores["B"]) == pytest.approx(0.5, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            train_nb([vec((1, 0, 0))], ["A"], "multinomial")

    def test_mode_mismatch_rejected(self):
        with pytest.raises(ValueError):
            train_nb([vec((2, 0, 0), "counts")], ["A"], "bernoulli")

    def test_all_zero_vector_predicts_prior_argmax(self):
        vecs = [vec((1, 0, 0)), vec((0, 1, 0)), vec((0, 1, 0))]
        model = train_nb(vecs, ["A", "B", "B"], "multinomial", 1.0, VOCAB3)
        label, _ = predict(model, vec((0, 0, 0)))
        assert label == "B"

    def _binary_docs(self):
        return [c for c in itertools.product((0, 1), repeat=3) if any(c)]

    def test_small_family_matches_oracle(self):
        # spot version of the exhaustive acceptance check: all 2-doc corpora
        docs = self._binary_docs()
        for d1, d2 in itertools.combinations_with_replacement(docs, 2):
            corpus = [(d1, "A"), (d2, "B")]
            vecs_c = [vec(d) for d, _ in corpus]
            vecs_b = [vec(d, "binary") for d, _ in corpus]
            labels = [l for _, l in corpus]
            mnb = train_nb(vecs_c, labels, "multinomial", 1.0, VOCAB3)
            bnb = train_nb(vecs_b, labels, "bernoulli", 1.0, VOCAB3)
            for t in docs:
                want = nb_oracle.multinomial_posteriors(corpus, t)
                _, scores = predict(mnb, vec(t))
                for lab in want:
                    assert math.exp(scores[lab]) == pytest.approx(want[lab], abs=1e-9)
                want_b = nb_oracle.bernoulli_posteriors(corpus, t)
                _, scores_b = predict(bnb, vec(t, "binary"))
                for lab in want_b:
                    assert math.exp(scores_b[lab]) == pytest.approx(want_b[lab], abs=1e-9)

    def test_fractional_alpha_matches_oracle(self):
        from fractions import Fraction

        corpus = [((1, 1, 0), "A"), ((0, 1, 1), "B"), ((1, 0, 1), "B")]
        vecs_c = [vec(d) for d, _ in corpus]
        model = train_nb(vecs_c, [l for _, l in corpus], "multinomial", alpha=0.5, vocabulary=VOCAB3)
        want = nb_oracle.multinomial_posteriors(corpus, (1, 1, 1), alpha=Fraction(1, 2))
        _, scores = predict(model, vec((1, 1, 1)))
        for lab in want:
            assert math.exp(scores[lab]) == pytest.approx(want[lab], abs=1e-9)

    def test_scaling_preserves_strict_argmax(self):
        # balanced corpora (uniform priors): scaling counts by k never turns
        # one strict argmax into another; exact ties may fall either way.
        docs = self._binary_docs()
        for d1, d2 in itertools.product(docs, repeat=2):
            labels = ["A", "B"]
            base = train_nb([vec(d1), vec(d2)], labels, "multinomial", 1.0, VOCAB3)
            for k in (2, 3):
                scaled = train_nb(
                    [vec(tuple(k * x for x in d)) for d in (d1, d2)], labels, "multinomial", 1.0, VOCAB3
                )
                for t in docs:
                    l1, s1 = predict(base, vec(t))
                    lk, sk = predict(scaled, vec(tuple(k * x for x in t)))
                    if l1 != lk:
                        tied = abs(s1["A"] - s1["B"]) < 1e-9 or abs(sk["A"] - sk["B"]) < 1e-9
                        assert tied, (d1, d2, k, t, s1, sk)


def separable_points(n_per_class=100, seed=7):
    rng = random.Random(seed)
    centers = {"a": (10.0, 0.0), "b": (0.0, 10.0), "c": (-10.0, -10.0)}
    vectors, labels = [], []
    for lab, (cx, cy) in centers.items():
        for _ in range(n_per_class):
            vectors.append(
                FeatureVector(
                    pairs=((0, cx + rng.uniform(-1, 1)), (1, cy + rng.uniform(-1, 1))), mode="counts"
                )
            )
            labels.append(lab)
    return vectors, labels


class TestLinearSvm:
    def test_separable_reaches_perfect_training_accuracy(self):
        vectors, labels = separable_points()
        model = train_linear_svm(vectors, labels, lam=1e-4, epochs=200, seed=42)
        correct = sum(predict(model, v)[0] == l for v, l in zip(vectors, labels))
        assert correct == len(labels)

    def test_rerun_is_byte_identical(self):
        vectors, labels = separable_points()
        m1 = train_linear_svm(vectors, labels, lam=1e-4, epochs=50, seed=42)
        m2 = train_linear_svm(vectors, labels, lam=1e-4, epochs=50, seed=42)
        assert serialize_model(m1) == serialize_model(m2)

    def test_one_hot_single_points(self):
        vectors = [vec((1, 0, 0)), vec((0, 1, 0)), vec((0, 0, 1))]
        labels = ["a", "b", "c"]
        model = train_linear_svm(vectors, labels, epochs=50, seed=1, vocabulary=VOCAB3)
        for v, l in zip(vectors, labels):
            assert predict(model, v)[0] == l

    def test_objective_non_increasing(self):
        vectors, labels = separable_points(n_per_class=30)
        initial = train_linear_svm(vectors, labels, lam=1e-4, epochs=0, seed=42)
        final = train_linear_svm(vectors, labels, lam=1e-4, epochs=100, seed=42)
        assert svm_objective(final, vectors, labels) <= svm_objective(initial, vectors, labels)

    def test_conflicting_identical_points_still_train(self):
        vectors = [vec((1, 1, 0))] * 4
        labels = ["a", "b", "a", "b"]
        model = train_linear_svm(vectors, labels, epochs=10, seed=3, vocabulary=VOCAB3)
        assert model.kind == "linear_svm"

    def test_all_zero_vector_predicts_bias_argmax(self):
        vectors = [vec((1, 0, 0)), vec((0, 1, 0)), vec((0, 1, 0))]
        model = train_linear_svm(vectors, ["a", "b", "b"], epochs=20, seed=5, vocabulary=VOCAB3)
        label, scores = predict(model, vec((0, 0, 0)))
        biases = dict(zip(model.classes, model.parameters["biases"]))
        assert label == max(model.classes, key=lambda c: biases[c])
        assert scores == pytest.approx(biases)


class TestModelSerialization:
    def test_round_trip_predictions_exact(self, tmp_path):
        vectors, labels = separable_points(n_per_class=10)
        for model in (
            train_linear_svm(vectors, labels, epochs=20, seed=42),
            train_nb([vec((1, 2, 0)), vec((0, 1, 1))], ["A", "B"], "multinomial", 1.0, VOCAB3),
            train_nb([vec((1, 1, 0), "binary"), vec((0, 1, 1), "binary")], ["A", "B"], "bernoulli", 1.0, VOCAB3),
        ):
            path = tmp_path / f"{model.kind}.json"
            save_model(model, path)
            back = load_model(path)
            probe = vectors[0] if model.kind == "linear_svm" else vec((1, 0, 1), vectors[0].mode)
            if model.kind == "bernoulli_nb":
                probe = vec((1, 0, 1), "binary")
            assert predict(back, probe) == predict(model, probe)
            assert serialize_model(back) == serialize_model(model)

    def test_dimension_mismatch_rejected(self):
        model = train_nb([vec((1, 0, 0)), vec((0, 1, 0))], ["A", "B"], "multinomial", 1.0, VOCAB3)
        with pytest.raises(ValueError, match="features"):
            predict(model, FeatureVector(pairs=((7, 1.0),), mode="counts"))

    def test_unknown_format_version_rejected(self, tmp_path):
        model = train_nb([vec((1, 0, 0)), vec((0, 1, 0))], ["A", "B"], "multinomial", 1.0, VOCAB3)
        d = model.to_dict()
        d["format_version"] = 99
        import json

        path = tmp_path / "m.json"
        path.write_text(json.dumps(d), encoding="utf-8")
        with pytest.raises(ValueError, match="format version"):
            load_model(path)


def test_label_order():
    assert label_order(["neutral", "positive", "negative"]) == ["positive", "negative", "neutral"]
    assert label_order(["b", "a", "positive"]) == ["positive", "a", "b"]
