"""
Pruning the least relevant sentences, and ranking latency
=========================================================

Pruning ranks an article once against a question and then removes the lowest
ranked sentence, one per round (up to five), e.g. to shorten the input of a
text generator. The second half times graph build + power iteration +
selection on 100-sentence documents with 384-dimensional vectors, the size of
common sentence-transformer outputs.
"""

import time

import numpy as np

from claimex.embeddings import TfidfEmbedder
from claimex.ranking import RankParams, prune_least_relevant, rank_document
from claimex.synthetic import planted_relevance_corpus, random_embedding_document, to_embedding_set

records = planted_relevance_corpus(n_records=20, n_background=6, seed=4)
record = records[0]
embedder = TfidfEmbedder.fit(records)
steps = prune_least_relevant(record.document, embedder.embed(record), rounds=5)
print("planted sentences:", record.relevant_sentence_indices)
for i, step in enumerate(steps, 1):
    print(f"round {i}: removed sentence {step.removed_index}, {len(step.document)} left")

#%%
# Re-ranking after each removal is available as a variant.
rerank = prune_least_relevant(record.document, embedder.embed(record), rounds=5, rerank=True)
print("re-ranked removals:", [s.removed_index for s in rerank])

#%%
times = []
for seed in range(30):
    rec, vecs, bias = random_embedding_document(100, 384, seed=seed)
    emb = to_embedding_set(vecs, bias)
    rank_document(emb, rec.document, RankParams())  # warm-up
    t0 = time.perf_counter()
    rank_document(emb, rec.document, RankParams())
    times.append((time.perf_counter() - t0) * 1000)
print(f"p50 {np.percentile(times, 50):.2f} ms, p95 {np.percentile(times, 95):.2f} ms")
