"""Sentence graphs and (biased) TextRank.

Sentences are nodes of a dense graph whose edge weights are cosine
similarities clamped at zero. Scores are the stationary distribution of a
damped random walk on that graph: with probability ``damping`` the walker
follows an edge, otherwise it jumps to a node drawn from a restart
distribution. A uniform restart gives plain TextRank; a restart proportional
to each sentence's similarity with a bias query (a claim or a question) gives
Biased TextRank.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .corpus import Document, Sentence
from .embeddings import EmbeddingSet, cosine_to, normalize_rows

DAMPING = 0.85
TOL = 1e-6
MAX_ITER = 100
TOP_K = 5


@dataclass(frozen=True)
class RankParams:
    damping: float = DAMPING
    tol: float = TOL
    max_iter: int = MAX_ITER
    top_k: int = TOP_K

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be at least 1, got {self.top_k}")


@dataclass(frozen=True)
class SimilarityGraph:
    weights: np.ndarray
    transition: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class RestartDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("restart distribution must be a non-empty vector")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("restart distribution must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", p)

    def __len__(self) -> int:
        return self.probabilities.size


@dataclass(frozen=True)
class RankResult:
    scores: np.ndarray
    selected: tuple[int, ...]
    explanation_text: str
    iterations_used: int
    converged: bool

    def to_json(self, id: str, method: str) -> dict:
        return {
            "id": id,
            "method": method,
            "selected_indices": list(self.selected),
            "explanation_text": self.explanation_text,
            "scores": [float(s) for s in self.scores],
            "iterations": self.iterations_used,
            "converged": self.converged,
        }

    def dumps(self, id: str, method: str) -> str:
        return json.dumps(self.to_json(id, method), ensure_ascii=False)


class PowerIterationResult(NamedTuple):
    scores: np.ndarray
    iterations: int
    converged: bool


def _as_vectors(embeddings) -> np.ndarray:
    if isinstance(embeddings, EmbeddingSet):
        return embeddings.sentence_vectors
    return np.atleast_2d(np.asarray(embeddings, dtype=float))


def build_graph(embeddings) -> SimilarityGraph:
    """Dense similarity graph over the sentence vectors of ``embeddings``."""
    x = _as_vectors(embeddings)
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot build a graph from an empty embedding set")
    unit = normalize_rows(x)
    w = unit @ unit.T
    w = (w + w.T) / 2.0  # BLAS output is not guaranteed bit-symmetric
    np.clip(w, 0.0, 1.0, out=w)
    np.fill_diagonal(w, 0.0)

    row_sums = w.sum(axis=1)
    t = np.empty_like(w)
    live = row_sums > 0
    t[live] = w[live] / row_sums[live, None]
    if n == 1:
        t[:] = 1.0
    else:
        dead = np.flatnonzero(~live)
        t[dead] = 1.0 / (n - 1)
        t[dead, dead] = 0.0
    return SimilarityGraph(weights=w, transition=t)


def uniform_restart(n: int) -> RestartDistribution:
    return RestartDistribution(np.full(n, 1.0 / n))


def _normalized(p: np.ndarray) -> np.ndarray:
    p = p / p.sum()
    # absorb rounding so the components sum to 1 within 1e-12
    return p / p.sum()


def bias_restart(embeddings: EmbeddingSet) -> RestartDistribution:
    """Restart mass proportional to each sentence's clamped cosine with the bias."""
    sims = np.maximum(cosine_to(embeddings.sentence_vectors, embeddings.bias_vector), 0.0)
    if sims.size == 0:
        raise ValueError("no sentences to restart on")
    if sims.sum() <= 0:
        return uniform_restart(sims.size)
    return RestartDistribution(_normalized(sims))


def power_iteration(
    graph: SimilarityGraph,
    restart: RestartDistribution,
    damping: float = DAMPING,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
) -> PowerIterationResult:
    """Stationary distribution of the damped walk, starting from ``restart``.

    Iterates ``s <- (1 - damping) * r + damping * T^T s`` until the L1 change
    drops below ``tol`` or ``max_iter`` updates have been made.
    """
    r = restart.probabilities
    if r.size != graph.n:
        raise ValueError(f"restart has {r.size} components but the graph has {graph.n} nodes")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    tt = graph.transition.T
    teleport = (1.0 - damping) * r
    s = r.copy()
    converged = False
    it = 0
    while it < max_iter:
        s_new = teleport + damping * (tt @ s)
        it += 1
        delta = np.abs(s_new - s).sum()
        s = s_new
        if delta < tol:
            converged = True
            break
    return PowerIterationResult(s / s.sum(), it, converged)


def _texts(sentences) -> list[str]:
    if isinstance(sentences, Document):
        return sentences.texts
    return [s.text if isinstance(s, Sentence) else str(s) for s in sentences]


def select_top_k(scores, sentences, k: int = TOP_K) -> tuple[tuple[int, ...], str]:
    """Indices of the ``k`` best scores in document order, and their joined text.

    Ties go to the lower index.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    scores = np.asarray(scores, dtype=float)
    texts = _texts(sentences)
    if len(texts) != scores.size:
        raise ValueError(f"{scores.size} scores for {len(texts)} sentences")
    # lexsort: last key is primary
    order = np.lexsort((np.arange(scores.size), -scores))
    chosen = tuple(sorted(int(i) for i in order[:k]))
    return chosen, " ".join(texts[i] for i in chosen)


def _rank(graph, restart, sentences, params: RankParams) -> RankResult:
    scores, iterations, converged = power_iteration(
        graph, restart, params.damping, params.tol, params.max_iter
    )
    selected, text = select_top_k(scores, sentences, params.top_k)
    return RankResult(scores, selected, text, iterations, converged)


def textrank(graph: SimilarityGraph, sentences, params: RankParams = RankParams()) -> RankResult:
    return _rank(graph, uniform_restart(graph.n), sentences, params)


def biased_textrank(
    graph: SimilarityGraph,
    restart: RestartDistribution,
    sentences,
    params: RankParams = RankParams(),
) -> RankResult:
    return _rank(graph, restart, sentences, params)


def embedding_similarity_baseline(embeddings: EmbeddingSet, sentences, k: int = TOP_K) -> RankResult:
    """Rank sentences by raw cosine with the bias vector; no graph involved."""
    scores = cosine_to(embeddings.sentence_vectors, embeddings.bias_vector)
    selected, text = select_top_k(scores, sentences, k)
    return RankResult(scores, selected, text, 0, True)


def rank_document(
    embeddings: EmbeddingSet,
    sentences,
    params: RankParams = RankParams(),
    biased: bool = True,
) -> RankResult:
    """Graph build, power iteration and selection for one document."""
    graph = build_graph(embeddings)
    restart = bias_restart(embeddings) if biased else uniform_restart(graph.n)
    return _rank(graph, restart, sentences, params)


@dataclass(frozen=True)
class PruneStep:
    removed_index: int  # index in the original document
    document: Document


def prune_least_relevant(
    document: Document,
    embeddings: EmbeddingSet,
    rounds: int = 5,
    params: RankParams = RankParams(),
    rerank: bool = False,
) -> list[PruneStep]:
    """Repeatedly drop the least important sentence.

    Round ``r`` removes the sentence with the ``r``-th lowest Biased TextRank
    score of a single initial ranking, so the outputs shrink by one sentence
    each. With ``rerank=True`` the remaining sentences are re-ranked before
    every removal instead. Pruning stops once a single sentence is left.
    """
    n = len(document)
    if n < 2:
        raise ValueError("nothing to prune")
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    if len(embeddings) != n:
        raise ValueError(f"{len(embeddings)} sentence vectors for {n} sentences")

    remaining = list(range(n))
    if not rerank:
        scores = rank_document(embeddings, document, params).scores
        # ascending score, ties -> higher index goes first so lower index survives
        removal_order = [int(i) for i in np.lexsort((-np.arange(n), scores))]

    steps = []
    for r in range(rounds):
        if len(remaining) <= 1:
            break
        if rerank:
            sub = embeddings.subset(remaining)
            sub_scores = rank_document(sub, [document.sentences[i] for i in remaining], params).scores
            local = int(np.lexsort((-np.arange(len(remaining)), sub_scores))[0])
            victim = remaining[local]
        else:
            victim = removal_order[r]
        remaining.remove(victim)
        pruned = Document.from_sentences(
            f"{document.id}#prune{r + 1}", [document.sentences[i].text for i in remaining]
        )
        steps.append(PruneStep(victim, pruned))
    return steps
