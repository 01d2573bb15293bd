"""Bag-of-words features and the three classifier families: multinomial
naive Bayes, Bernoulli naive Bayes, and a one-vs-rest linear SVM trained
with seeded stochastic subgradient descent.

Training is deterministic: identical data, hyperparameters and seed yield
byte-identical serialized models.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Vocabulary",
    "FeatureVector",
    "Model",
    "build_vocabulary",
    "vectorize",
    "train_nb",
    "train_linear_svm",
    "predict",
    "save_model",
    "load_model",
    "label_order",
]

MODEL_KINDS = ("multinomial_nb", "bernoulli_nb", "linear_svm")
MODEL_FORMAT_VERSION = 1
_POLARITY_ORDER = ("positive", "negative", "neutral")


def label_order(labels) -> list[str]:
    """Canonical class order: the polarity classes first, anything else
    appended alphabetically."""
    present = set(labels)
    ordered = [l for l in _POLARITY_ORDER if l in present]
    ordered += sorted(present - set(_POLARITY_ORDER))
    return ordered


@dataclass
class Vocabulary:
    index: dict[str, int]
    doc_freq: dict[str, int]
    min_df: int

    def __len__(self) -> int:
        return len(self.index)

    def to_dict(self) -> dict:
        tokens = sorted(self.index, key=self.index.get)
        return {"tokens": tokens, "doc_freq": [self.doc_freq[t] for t in tokens], "min_df": self.min_df}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        index = {t: i for i, t in enumerate(d["tokens"])}
        return cls(index=index, doc_freq=dict(zip(d["tokens"], d["doc_freq"])), min_df=d["min_df"])


def build_vocabulary(documents: list[list[str]], min_df: int = 1) -> Vocabulary:
    """Index assignment is deterministic: document frequency descending,
    then token lexicographic."""
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if not documents:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df: dict[str, int] = {}
    for doc in documents:
        for tok in set(doc):
            df[tok] = df.get(tok, 0) + 1
    kept = [t for t, n in df.items() if n >= min_df]
    kept.sort(key=lambda t: (-df[t], t))
    return Vocabulary(index={t: i for i, t in enumerate(kept)}, doc_freq={t: df[t] for t in kept}, min_df=min_df)


@dataclass(frozen=True)
class FeatureVector:
    pairs: tuple[tuple[int, float], ...]  # (index, value), indices strictly increasing
    mode: str  # "counts" or "binary"

    def dense(self, size: int) -> np.ndarray:
        v = np.zeros(size)
        for i, x in self.pairs:
            v[i] = x
        return v

    @property
    def max_index(self) -> int:
        return self.pairs[-1][0] if self.pairs else -1


def vectorize(tokens: list[str], vocab: Vocabulary, mode: str = "counts") -> FeatureVector:
    if mode not in ("counts", "binary"):
        raise ValueError(f"unknown vector mode {mode!r}")
    counts: dict[int, float] = {}
    for tok in tokens:
        idx = vocab.index.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    if mode == "binary":
        counts = {i: 1.0 for i in counts}
    return FeatureVector(pairs=tuple(sorted(counts.items())), mode=mode)


@dataclass
class Model:
    kind: str
    classes: list[str]
    vocabulary: Vocabulary
    parameters: dict
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "classes": self.classes,
            "vocabulary": self.vocabulary.to_dict(),
            "parameters": self.parameters,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Model":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {d.get('format_version')!r}")
        return cls(
            kind=d["kind"],
            classes=list(d["classes"]),
            vocabulary=Vocabulary.from_dict(d["vocabulary"]),
            parameters=d["parameters"],
            config=dict(d.get("config", {})),
        )


def serialize_model(model: Model) -> bytes:
    return (json.dumps(model.to_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n").encode(
        "utf-8"
    )


def save_model(model: Model, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_model(model))


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return Model.from_dict(json.load(fh))


def _check_training_inputs(vectors: list[FeatureVector], labels: list[str], expected_mode: str | None):
    if len(vectors) != len(labels):
        raise ValueError("vectors and labels must be aligned")
    if not vectors:
        raise ValueError("empty training set")
    if expected_mode is not None:
        bad = {v.mode for v in vectors} - {expected_mode}
        if bad:
            raise ValueError(f"expected {expected_mode} vectors, got {sorted(bad)}")


def train_nb(
    vectors: list[FeatureVector],
    labels: list[str],
    variant: str,
    alpha: float = 1.0,
    vocabulary: Vocabulary | None = None,
) -> Model:
    """Naive Bayes with additive smoothing; priors are class frequencies."""
    if variant not in ("multinomial", "bernoulli"):
        raise ValueError(f"unknown NB variant {variant!r}")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    mode = "counts" if variant == "multinomial" else "binary"
    _check_training_inputs(vectors, labels, mode)
    classes = label_order(labels)
    if len(classes) < 2:
        raise ValueError("training data must contain at least 2 classes")
    size = len(vocabulary) if vocabulary else max((v.max_index for v in vectors), default=-1) + 1
    counts = np.zeros((len(classes), size))
    class_docs = np.zeros(len(classes))
    class_of = {c: k for k, c in enumerate(classes)}
    for vec, lab in zip(vectors, labels):
        k = class_of[lab]
        class_docs[k] += 1
        for i, x in vec.pairs:
            counts[k, i] += x
    log_prior = np.log(class_docs) - math.log(len(vectors))
    if variant == "multinomial":
        totals = counts.sum(axis=1, keepdims=True)
        log_prob = np.log(counts + alpha) - np.log(totals + alpha * size)
        parameters = {
            "log_prior": log_prior.tolist(),
            "feature_log_prob": log_prob.tolist(),
        }
    else:
        present = (counts + alpha) / (class_docs[:, None] + 2.0 * alpha)
        parameters = {
            "log_prior": log_prior.tolist(),
            "feature_log_prob": np.log(present).tolist(),
            "feature_log_absent": np.log(1.0 - present).tolist(),
        }
    return Model(
        kind=f"{variant}_nb",
        classes=classes,
        vocabulary=vocabulary or Vocabulary(index={}, doc_freq={}, min_df=1),
        parameters=parameters,
        config={"alpha": alpha, "n_features": size},
    )


def train_linear_svm(
    vectors: list[FeatureVector],
    labels: list[str],
    lam: float = 1e-4,
    epochs: int = 100,
    seed: int = 42,
    vocabulary: Vocabulary | None = None,
) -> Model:
    """One-vs-rest hinge-loss training by seeded stochastic subgradient
    descent (Pegasos-style step sizes); fully deterministic."""
    _check_training_inputs(vectors, labels, None)
    classes = label_order(labels)
    if len(classes) < 2:
        raise ValueError("training data must contain at least 2 classes")
    size = len(vocabulary) if vocabulary else max((v.max_index for v in vectors), default=-1) + 1
    weights = np.zeros((len(classes), size))
    biases = np.zeros(len(classes))
    n = len(vectors)
    for k, cls in enumerate(classes):
        ys = [1.0 if lab == cls else -1.0 for lab in labels]
        w = np.zeros(size)
        b = 0.0
        rng = random.Random(seed)
        order = list(range(n))
        t = 0
        for _ in range(epochs):
            rng.shuffle(order)
            for idx in order:
                t += 1
                eta = 1.0 / (lam * t)
                vec, y = vectors[idx], ys[idx]
                score = b + sum(w[i] * x for i, x in vec.pairs)
                w *= 1.0 - eta * lam
                b *= 1.0 - eta * lam
                if y * score < 1.0:
                    for i, x in vec.pairs:
                        w[i] += eta * y * x
                    b += eta * y
        weights[k] = w
        biases[k] = b
    return Model(
        kind="linear_svm",
        classes=classes,
        vocabulary=vocabulary or Vocabulary(index={}, doc_freq={}, min_df=1),
        parameters={"weights": weights.tolist(), "biases": biases.tolist()},
        config={"lambda": lam, "epochs": epochs, "seed": seed, "n_features": size},
    )


def svm_objective(model: Model, vectors: list[FeatureVector], labels: list[str]) -> float:
    """Mean regularized hinge loss over the one-vs-rest problems."""
    weights = np.asarray(model.parameters["weights"])
    biases = model.parameters["biases"]
    lam = model.config["lambda"]
    total = 0.0
    for k, cls in enumerate(model.classes):
        w, b = weights[k], biases[k]
        hinge = 0.0
        for vec, lab in zip(vectors, labels):
            y = 1.0 if lab == cls else -1.0
            score = b + sum(w[i] * x for i, x in vec.pairs)
            hinge += max(0.0, 1.0 - y * score)
        total += 0.5 * lam * float(w @ w) + hinge / len(vectors)
    return total / len(model.classes)


def _n_features(model: Model) -> int:
    return int(model.config.get("n_features", len(model.vocabulary)))


def predict(model: Model, vector: FeatureVector) -> tuple[str, dict[str, float]]:
    """Label plus per-class scores: normalized log-posteriors for NB,
    margins for the SVM. Ties break by class order."""
    size = _n_features(model)
    if vector.max_index >= size:
        raise ValueError(f"vector has index {vector.max_index} but model has {size} features")
    if model.kind in ("multinomial_nb", "bernoulli_nb"):
        log_prior = np.asarray(model.parameters["log_prior"])
        log_prob = np.asarray(model.parameters["feature_log_prob"])
        joint = log_prior.copy()
        if model.kind == "multinomial_nb":
            for i, x in vector.pairs:
                joint += x * log_prob[:, i]
        else:
            log_absent = np.asarray(model.parameters["feature_log_absent"])
            joint += log_absent.sum(axis=1)
            for i, _x in vector.pairs:
                joint += log_prob[:, i] - log_absent[:, i]
        log_posterior = joint - _logsumexp(joint)
        scores = log_posterior
    elif model.kind == "linear_svm":
        weights = np.asarray(model.parameters["weights"])
        scores = np.asarray(model.parameters["biases"], dtype=float).copy()
        for i, x in vector.pairs:
            scores += x * weights[:, i]
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    best = int(np.argmax(scores))
    return model.classes[best], {c: float(s) for c, s in zip(model.classes, scores)}


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    return m + math.log(float(np.sum(np.exp(a - m))))
