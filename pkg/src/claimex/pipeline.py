"""Batch explanation generation: pick an embedder and a ranking method, run it over records."""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import CorpusRecord
from .embeddings import Embedder, EmbeddingSet, FileEmbedder, TfidfEmbedder
from .errors import ConfigurationError
from .ranking import RankParams, RankResult, embedding_similarity_baseline, rank_document, select_top_k

METHODS = ("biased-textrank", "textrank", "embedding-similarity", "random")


def corpus_fingerprint(records: Sequence[CorpusRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


class CachedEmbedder:
    """Stores each record's vectors under ``cache_dir/<key>/`` keyed by corpus and embedder."""

    def __init__(self, inner: Embedder, cache_dir, corpus_hash: str):
        self.inner = inner
        self.name = inner.name
        key = hashlib.sha256(f"{corpus_hash}|{inner.name}".encode("utf-8")).hexdigest()[:20]
        self.directory = Path(cache_dir) / key
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, record_id: str) -> Path:
        safe = hashlib.sha256(record_id.encode("utf-8")).hexdigest()[:24]
        return self.directory / f"{safe}.npz"

    def embed(self, record: CorpusRecord) -> EmbeddingSet:
        path = self._path(record.id)
        if path.exists():
            with np.load(path) as data:
                return EmbeddingSet(int(data["dimension"]), data["sentences"], data["bias"])
        emb = self.inner.embed(record)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, dimension=emb.dimension, sentences=emb.sentence_vectors, bias=emb.bias_vector)
        tmp.replace(path)
        return emb


def make_embedder(spec: str, records: Sequence[CorpusRecord], cache_dir=None) -> Embedder:
    """``"tfidf"`` (fitted on the articles of ``records``) or ``"file:<directory>"``."""
    if spec == "tfidf":
        embedder: Embedder = TfidfEmbedder.fit(records)
    elif spec.startswith("file:") and len(spec) > len("file:"):
        embedder = FileEmbedder(spec[len("file:") :])
    else:
        raise ConfigurationError(f"unknown embedder {spec!r} (expected 'tfidf' or 'file:<dir>')")
    if cache_dir is not None:
        embedder = CachedEmbedder(embedder, cache_dir, corpus_fingerprint(records))
    return embedder


def _random_result(record: CorpusRecord, k: int, seed: int) -> RankResult:
    n = len(record.document)
    digest = hashlib.sha256(f"{seed}:{record.id}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    scores = rng.random(n)
    selected, text = select_top_k(scores, record.document, k)
    return RankResult(np.full(n, 1.0 / n), selected, text, 0, True)


def explain_record(
    record: CorpusRecord,
    embeddings: Optional[EmbeddingSet],
    method: str = "biased-textrank",
    params: RankParams = RankParams(),
    seed: int = 42,
) -> RankResult:
    """One explanation for ``record``.

    ``random`` picks ``top_k`` sentences uniformly at random (seeded by
    ``seed`` and the record id) and is meant as a floor for comparisons.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}")
    doc = record.document
    if len(doc) == 0:
        return RankResult(np.zeros(0), (), "", 0, True)
    if method == "random":
        return _random_result(record, params.top_k, seed)
    if embeddings is None:
        raise ValueError(f"method {method!r} needs embeddings")
    if method == "embedding-similarity":
        return embedding_similarity_baseline(embeddings, doc, params.top_k)
    return rank_document(embeddings, doc, params, biased=method == "biased-textrank")


def explain_corpus(
    records: Sequence[CorpusRecord],
    embedder: Optional[Embedder],
    method: str = "biased-textrank",
    params: RankParams = RankParams(),
    seed: int = 42,
    jobs: int = 1,
) -> list[RankResult]:
    """Explanations for all records, in input order."""

    def one(record):
        needs_vectors = method != "random" and len(record.document) > 0
        emb = embedder.embed(record) if needs_vectors else None
        return explain_record(record, emb, method, params, seed)

    if jobs <= 1:
        return [one(r) for r in records]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, records))
