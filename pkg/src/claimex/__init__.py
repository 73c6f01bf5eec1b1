"""Claim-focused extractive explanations with Biased TextRank, and tools to evaluate them."""

__version__ = "0.1.0"

from .corpus import (
    BiasQuery,
    CorpusRecord,
    Document,
    Sentence,
    adapt_health_reviews,
    adapt_liarplus,
    corpus_statistics,
    load_jsonl_corpus,
    segment_sentences,
    tokenize,
)
from .embeddings import EmbeddingSet, TfidfModel, cosine_similarity, embed_tfidf, fit_tfidf, load_embeddings
from .ranking import (
    RankParams,
    RankResult,
    bias_restart,
    biased_textrank,
    build_graph,
    embedding_similarity_baseline,
    power_iteration,
    prune_least_relevant,
    select_top_k,
    textrank,
    uniform_restart,
)
from .rouge import RougeScore, corpus_rouge, rouge_l, rouge_n
from .stats import welch_t_test
