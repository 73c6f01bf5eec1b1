"""Sentence and bias-query vectors.

Two providers share one contract (:class:`Embedder`): a TF-IDF embedder fitted
on the corpus articles, and a loader for vectors computed elsewhere, e.g. by a
sentence-transformer, stored one file per record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import numpy as np

from .corpus import BiasQuery, CorpusRecord, Document
from .errors import EmbeddingFormatError


@dataclass(frozen=True)
class EmbeddingSet:
    dimension: int
    sentence_vectors: np.ndarray  # (n_sentences, dimension)
    bias_vector: np.ndarray  # (dimension,)

    def __post_init__(self):
        sv = np.asarray(self.sentence_vectors, dtype=float)
        if sv.ndim == 1 and sv.size == 0:
            sv = sv.reshape(0, self.dimension)
        bv = np.asarray(self.bias_vector, dtype=float)
        if self.dimension < 1:
            raise EmbeddingFormatError("dimension must be positive")
        if sv.ndim != 2 or sv.shape[1] != self.dimension:
            raise EmbeddingFormatError(
                f"sentence vectors have shape {sv.shape}, expected (n, {self.dimension})"
            )
        if bv.shape != (self.dimension,):
            raise EmbeddingFormatError(f"bias vector has shape {bv.shape}, expected ({self.dimension},)")
        if not (np.isfinite(sv).all() and np.isfinite(bv).all()):
            raise EmbeddingFormatError("embedding contains non-finite values")
        object.__setattr__(self, "sentence_vectors", sv)
        object.__setattr__(self, "bias_vector", bv)

    def __len__(self) -> int:
        return self.sentence_vectors.shape[0]

    def subset(self, indices: Sequence[int]) -> "EmbeddingSet":
        return EmbeddingSet(self.dimension, self.sentence_vectors[list(indices)], self.bias_vector)


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between ``u`` and ``v``; 0 if either is the zero vector."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(np.dot(u, u)))
    nv = math.sqrt(float(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, c))


def normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x, dtype=float), where=norms > 0)


def cosine_to(vectors: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Cosine similarity of every row of ``vectors`` to ``target``."""
    out = normalize_rows(np.atleast_2d(vectors)) @ normalize_rows(target)
    return np.clip(out, -1.0, 1.0)


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Mapping[str, int]
    document_frequencies: Mapping[str, int]
    corpus_size: int

    @cached_property
    def idf(self) -> np.ndarray:
        idf = np.empty(len(self.vocabulary))
        for tok, col in self.vocabulary.items():
            idf[col] = math.log((self.corpus_size + 1) / (self.document_frequencies[tok] + 1)) + 1.0
        return idf

    @property
    def dimension(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(documents: Sequence[Document]) -> TfidfModel:
    """Collect vocabulary and document frequencies from ``documents``.

    Columns follow lexicographic token order so the model is identical for
    identical input regardless of document order.
    """
    df: dict[str, int] = {}
    for doc in documents:
        for tok in set(doc.tokens):
            df[tok] = df.get(tok, 0) + 1
    if not df:
        raise ValueError("empty vocabulary")
    vocab = {tok: i for i, tok in enumerate(sorted(df))}
    return TfidfModel(vocabulary=vocab, document_frequencies=df, corpus_size=len(documents))


def embed_tfidf(model: TfidfModel, tokens: Sequence[str]) -> np.ndarray:
    vec = np.zeros(model.dimension)
    for tok in tokens:
        col = model.vocabulary.get(tok)
        if col is not None:
            vec[col] += 1.0
    vec *= model.idf
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


class Embedder(Protocol):
    name: str

    def embed(self, record: CorpusRecord) -> EmbeddingSet: ...


class TfidfEmbedder:
    """TF-IDF vectors with idf estimated over a set of articles."""

    name = "tfidf"

    def __init__(self, model: TfidfModel):
        self.model = model

    @classmethod
    def fit(cls, records: Sequence[CorpusRecord]) -> "TfidfEmbedder":
        return cls(fit_tfidf([r.document for r in records]))

    def embed(self, record: CorpusRecord) -> EmbeddingSet:
        return embed_document(self.model, record.document, record.bias)


def embed_document(model: TfidfModel, document: Document, bias: BiasQuery) -> EmbeddingSet:
    rows = np.zeros((len(document), model.dimension))
    for i, s in enumerate(document.sentences):
        rows[i] = embed_tfidf(model, s.tokens)
    return EmbeddingSet(model.dimension, rows, embed_tfidf(model, bias.tokens))


def _parse_vector(text: str, where: str) -> np.ndarray:
    try:
        values = np.array([float(x) for x in text.split()])
    except ValueError:
        raise EmbeddingFormatError(f"{where}: malformed number") from None
    if not np.isfinite(values).all():
        raise EmbeddingFormatError(f"{where}: non-finite value")
    return values


def load_embeddings(path, document: Document, bias: BiasQuery | None = None) -> EmbeddingSet:
    """Read a vector file with one line per sentence index plus one for ``bias``.

    Format: a ``dim <D>`` header, then ``<id>\\t<f1> ... <fD>`` lines.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            if dim is None:
                parts = line.split()
                if len(parts) != 2 or parts[0] != "dim" or not parts[1].isdigit() or int(parts[1]) < 1:
                    raise EmbeddingFormatError(f"{where}: expected header 'dim <D>'")
                dim = int(parts[1])
                continue
            if "\t" not in line:
                raise EmbeddingFormatError(f"{where}: expected '<id>\\t<values>'")
            key, _, rest = line.partition("\t")
            key = key.strip()
            vec = _parse_vector(rest, where)
            if vec.shape[0] != dim:
                raise EmbeddingFormatError(
                    f"{where}: dimension mismatch for vector {key}: got {vec.shape[0]}, expected {dim}"
                )
            if key in vectors:
                raise EmbeddingFormatError(f"{where}: duplicate vector id {key}")
            vectors[key] = vec
    if dim is None:
        raise EmbeddingFormatError(f"{path}: empty embedding file")

    expected = [str(i) for i in range(len(document))]
    for key in expected + ["bias"]:
        if key not in vectors:
            raise EmbeddingFormatError(f"missing vector: {key}")
    extra = sorted(set(vectors) - set(expected) - {"bias"})
    if extra:
        raise EmbeddingFormatError(f"unexpected vector id: {extra[0]}")
    rows = np.array([vectors[k] for k in expected]).reshape(len(expected), dim)
    return EmbeddingSet(dim, rows, vectors["bias"])


def write_embeddings(path, embeddings: EmbeddingSet) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"dim {embeddings.dimension}\n")
        for i, row in enumerate(embeddings.sentence_vectors):
            f.write(f"{i}\t" + " ".join(repr(float(x)) for x in row) + "\n")
        f.write("bias\t" + " ".join(repr(float(x)) for x in embeddings.bias_vector) + "\n")


class FileEmbedder:
    """Precomputed vectors stored as ``<directory>/<record id>.emb``."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.name = f"file:{self.directory}"
        if not self.directory.is_dir():
            raise EmbeddingFormatError(f"embedding directory not found: {self.directory}")

    def path_for(self, record_id: str) -> Path:
        return self.directory / f"{record_id}.emb"

    def embed(self, record: CorpusRecord) -> EmbeddingSet:
        path = self.path_for(record.id)
        if not path.exists():
            raise EmbeddingFormatError(f"no embedding file for record {record.id!r}: {path}")
        return load_embeddings(path, record.document, record.bias)
