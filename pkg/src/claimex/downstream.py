"""Can a classifier tell satisfactory answers apart from the generated explanations alone?

For one evaluative question, every article gets an explanation from a ranking
method. A bag-of-words logistic regression is trained on the training split
and scored on the test split, ten times with different seeds. Labels are 1 for
``satisfactory`` and 0 for ``unsatisfactory`` or ``not_applicable``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusRecord, tokenize
from .embeddings import Embedder, TfidfEmbedder
from .errors import EvaluationError
from .pipeline import explain_corpus
from .ranking import RankParams
from .stats import TTestResult, welch_t_test  # noqa: F401  (re-exported)


def binary_label(satisfactory_label: str) -> int:
    return 1 if satisfactory_label == "satisfactory" else 0


def build_vocabulary(texts: Sequence[str]) -> dict[str, int]:
    tokens = sorted({t for text in texts for t in tokenize(text)})
    return {t: i for i, t in enumerate(tokens)}


def featurize(explanation_text: str, vocabulary: Mapping[str, int]) -> sp.csr_matrix:
    """1 x |vocabulary| token-count row; unknown tokens are dropped."""
    counts: dict[int, int] = {}
    for tok in tokenize(explanation_text):
        col = vocabulary.get(tok)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    cols = sorted(counts)
    return sp.csr_matrix(
        ([float(counts[c]) for c in cols], ([0] * len(cols), cols)), shape=(1, len(vocabulary))
    )


@dataclass(frozen=True)
class LabeledExample:
    features: sp.csr_matrix
    label: int


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # vocabulary weights followed by the bias term
    training_config: TrainConfig

    def decision_function(self, x: sp.spmatrix) -> np.ndarray:
        return np.asarray(x @ self.weights[:-1]).ravel() + self.weights[-1]

    def predict(self, x: sp.spmatrix) -> np.ndarray:
        return (self.decision_function(x) >= 0).astype(int)


def _stack(examples: Sequence[LabeledExample]) -> tuple[sp.csr_matrix, np.ndarray]:
    x = sp.vstack([e.features for e in examples], format="csr")
    y = np.array([e.label for e in examples], dtype=float)
    return x, y


def train_classifier(examples: Sequence[LabeledExample], config: TrainConfig = TrainConfig()) -> LinearModel:
    """Logistic regression fitted by plain SGD, one example at a time.

    Weight initialization and the per-epoch shuffle both come from
    ``config.seed``, so equal inputs and seeds give bit-identical weights.
    """
    if not examples:
        raise EvaluationError("no training examples")
    labels = {e.label for e in examples}
    if labels != {0, 1}:
        raise EvaluationError(f"training set needs both classes, got {sorted(labels)}")
    x, y = _stack(examples)
    dim = x.shape[1]
    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, dim + 1)
    indptr, indices, data = x.indptr, x.indices, x.data
    lr = config.learning_rate
    for _ in range(config.epochs):
        for i in rng.permutation(len(y)):
            lo, hi = indptr[i], indptr[i + 1]
            idx, val = indices[lo:hi], data[lo:hi]
            z = float(w[idx] @ val) + w[-1]
            # numerically safe sigmoid
            p = 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))
            g = lr * (p - y[i])
            w[idx] -= g * val
            w[-1] -= g
    return LinearModel(w, config)


def f1_score(y_true, y_pred, positive: int) -> float:
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == positive and p == positive)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t != positive and p == positive)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == positive and p != positive)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def classification_metrics(y_true, y_pred) -> tuple[float, float, float]:
    """(accuracy, F1 of class 1, F1 of class 0); an empty class scores F1 = 0."""
    y_true = [int(t) for t in y_true]
    y_pred = [int(p) for p in y_pred]
    if not y_true:
        raise EvaluationError("empty test set")
    acc = sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)
    return acc, f1_score(y_true, y_pred, 1), f1_score(y_true, y_pred, 0)


def evaluate_classifier(model: LinearModel, test_examples: Sequence[LabeledExample]) -> tuple[float, float, float]:
    if not test_examples:
        raise EvaluationError("empty test set")
    x, y = _stack(test_examples)
    return classification_metrics(y.astype(int), model.predict(x))


@dataclass(frozen=True)
class ClassifierReport:
    question_id: Optional[int]
    method: str
    runs: int
    accuracy: float
    f1_positive: float
    f1_negative: float
    per_run: tuple[tuple[float, float, float], ...] = field(default=())

    @classmethod
    def from_runs(cls, question_id, method, per_run) -> "ClassifierReport":
        arr = np.array(per_run, dtype=float)
        acc, f1p, f1n = (float(v) for v in arr.mean(axis=0))
        return cls(question_id, method, len(per_run), acc, f1p, f1n, tuple(map(tuple, arr.tolist())))

    def metric(self, name: str) -> list[float]:
        col = ("accuracy", "f1_positive", "f1_negative").index(name)
        return [run[col] for run in self.per_run]

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "method": self.method,
            "runs": self.runs,
            "accuracy": self.accuracy,
            "f1_positive": self.f1_positive,
            "f1_negative": self.f1_negative,
            "per_run": [
                {"accuracy": a, "f1_positive": p, "f1_negative": n} for a, p, n in self.per_run
            ],
        }


def run_downstream_protocol(
    records: Sequence[CorpusRecord],
    method: str,
    question_id: int,
    runs: int = 10,
    embedder: Optional[Embedder] = None,
    params: RankParams = RankParams(),
    train_config: TrainConfig = TrainConfig(),
    seed: int = 42,
) -> ClassifierReport:
    """Train and test ``runs`` classifiers (seeds 1..runs) for one question.

    Records from the train and validation splits are used for training and the
    test split for evaluation; the split never changes between runs. Without
    an ``embedder`` a TF-IDF model is fitted on this question's articles.
    """
    if runs < 1:
        raise ValueError("runs must be positive")
    subset = [r for r in records if r.question_id == question_id]
    train = [r for r in subset if r.split in ("train", "validation")]
    test = [r for r in subset if r.split == "test"]
    if not train or not test:
        raise EvaluationError(
            f"question {question_id}: need both training and test records "
            f"(got {len(train)} and {len(test)})"
        )
    if embedder is None and method != "random":
        embedder = TfidfEmbedder.fit(subset)
    texts = [res.explanation_text for res in explain_corpus(subset, embedder, method, params, seed)]
    by_id = dict(zip((r.id for r in subset), texts))

    vocab = build_vocabulary([by_id[r.id] for r in train])

    def examples(rs):
        return [LabeledExample(featurize(by_id[r.id], vocab), binary_label(r.satisfactory_label)) for r in rs]

    train_ex, test_ex = examples(train), examples(test)
    per_run = []
    for run_seed in range(1, runs + 1):
        model = train_classifier(train_ex, replace(train_config, seed=run_seed))
        per_run.append(evaluate_classifier(model, test_ex))
    return ClassifierReport.from_runs(question_id, method, per_run)


def aggregate_reports(reports: Sequence[ClassifierReport]) -> ClassifierReport:
    """Average per-question reports of one method run by run, then over runs."""
    if not reports:
        raise EvaluationError("no reports to aggregate")
    methods = {r.method for r in reports}
    runs = {r.runs for r in reports}
    if len(methods) != 1 or len(runs) != 1:
        raise EvaluationError("reports must share method and run count")
    per_run = np.mean([np.array(r.per_run) for r in reports], axis=0)
    return ClassifierReport.from_runs(None, methods.pop(), per_run.tolist())


def format_downstream_csv(reports: Sequence[ClassifierReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["question_id", "method", "runs", "accuracy", "f1_positive", "f1_negative"])
    for r in reports:
        qid = "all" if r.question_id is None else r.question_id
        writer.writerow(
            [qid, r.method, r.runs]
            + [f"{100 * v:.2f}" for v in (r.accuracy, r.f1_positive, r.f1_negative)]
        )
    return buf.getvalue()


def dumps_reports(reports: Sequence[ClassifierReport]) -> str:
    return "".join(json.dumps(r.to_json()) + "\n" for r in reports)
