"""Seeded toy corpora with known answers.

Articles are made of pseudo-word sentences. "Background" sentences share one
generic vocabulary, so they are mutually similar and central in the sentence
graph; "planted" sentences share vocabulary with the bias query. A method that
listens to the bias should find the planted sentences, one that only looks at
centrality should not.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .corpus import ABBREVIATIONS, CorpusRecord, Document, BiasQuery

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def pseudo_words(count: int, rng: np.random.Generator, syllables=(2, 3)) -> list[str]:
    words: list[str] = []
    seen = set(ABBREVIATIONS)
    while len(words) < count:
        n = int(rng.integers(syllables[0], syllables[1] + 1))
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(n))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def make_sentence(words) -> str:
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def planted_relevance_corpus(
    n_records: int = 200,
    n_background: int = 15,
    n_planted: int = 5,
    seed: int = 0,
    claim_overlap: int = 2,
    n_distractors: int = 3,
    background_vocab: int = 40,
    topic_vocab: int = 400,
) -> list[CorpusRecord]:
    """Records whose reference explanation is the planted sentences, verbatim.

    Each article has ``n_background`` sentences of generic vocabulary, of
    which ``n_distractors`` also contain one claim word, and ``n_planted``
    sentences carrying ``claim_overlap`` claim words among generic ones, all
    in random order. The planted positions are stored in
    ``relevant_sentence_indices`` as well.
    """
    rng = np.random.default_rng(seed)
    background = pseudo_words(background_vocab, rng)
    topics = pseudo_words(topic_vocab, rng, syllables=(3, 4))
    records = []
    for r in range(n_records):
        claim_words = list(rng.choice(topics, size=8, replace=False))
        planted = []
        for _ in range(n_planted):
            words = list(rng.choice(claim_words, size=claim_overlap, replace=False)) + list(
                rng.choice(background, size=7 - claim_overlap, replace=False)
            )
            rng.shuffle(words)
            planted.append(make_sentence(words))
        filler = []
        for j in range(n_background):
            words = list(rng.choice(background, size=9, replace=False))
            if j < n_distractors:
                words[int(rng.integers(0, 9))] = str(rng.choice(claim_words))
            filler.append(make_sentence(words))
        order = rng.permutation(n_background + n_planted)
        sentences = [None] * len(order)
        relevant = []
        for pos, src in enumerate(order):
            if src < n_planted:
                sentences[pos] = planted[src]
                relevant.append(pos)
            else:
                sentences[pos] = filler[src - n_planted]
        rid = f"synth{r:04d}"
        doc = Document.from_sentences(rid, sentences)
        records.append(
            CorpusRecord(
                id=rid,
                document=doc,
                bias=BiasQuery.from_text(make_sentence(claim_words[:6])),
                split="test",
                reference_explanation=" ".join(sentences[i] for i in relevant),
                relevant_sentence_indices=tuple(relevant),
            )
        )
    return records


def synthetic_health_reviews(
    n_reviews: int = 150,
    n_background: int = 12,
    n_questions: int = 10,
    seed: int = 0,
    p_satisfactory: float = 0.5,
    label_signal: bool = True,
) -> list[dict]:
    """Review objects in the health-review JSON layout.

    Every article carries one planted sentence per question built from that
    question's keywords plus marker words; markers for satisfactory and
    unsatisfactory answers are disjoint and question specific. With
    ``label_signal=False`` the markers are drawn independently of the label.
    """
    rng = np.random.default_rng(seed)
    background = pseudo_words(40, rng)
    pool = pseudo_words(n_questions * 14, rng, syllables=(3, 4))
    questions = []
    for q in range(n_questions):
        chunk = pool[q * 14 : (q + 1) * 14]
        questions.append({"keywords": chunk[:6], "pos": chunk[6:10], "neg": chunk[10:14]})

    reviews = []
    for i in range(n_reviews):
        sentences = [make_sentence(rng.choice(background, size=9, replace=False)) for _ in range(n_background)]
        answers = []
        for q, spec in enumerate(questions, start=1):
            satisfactory = bool(rng.random() < p_satisfactory)
            if satisfactory:
                label = "satisfactory"
            else:
                label = "unsatisfactory" if rng.random() < 0.5 else "not_applicable"
            marker_pos = satisfactory if label_signal else bool(rng.random() < 0.5)
            markers = spec["pos"] if marker_pos else spec["neg"]
            words = list(rng.choice(spec["keywords"], size=4, replace=False)) + list(
                rng.choice(markers, size=2, replace=False)
            ) + list(rng.choice(background, size=2, replace=False))
            rng.shuffle(words)
            planted = make_sentence(words)
            sentences.insert(int(rng.integers(0, len(sentences) + 1)), planted)
            answers.append((q, label, planted))
        questions_out = []
        for q, label, planted in answers:
            questions_out.append(
                {
                    "question_id": q,
                    "question_text": make_sentence(questions[q - 1]["keywords"][:5]),
                    "explanation": planted,
                    "label": label,
                    "relevant_sentence_indices": [sentences.index(planted)],
                }
            )
        reviews.append({"id": f"review{i:04d}", "article_text": " ".join(sentences), "questions": questions_out})
    return reviews


def random_embedding_document(
    n_sentences: int = 100, dimension: int = 384, seed: int = 0, doc_id: str = "bench"
) -> tuple[CorpusRecord, np.ndarray, np.ndarray]:
    """A record with ``n_sentences`` placeholder sentences plus random vectors for them."""
    rng = np.random.default_rng(seed)
    words = pseudo_words(50, rng)
    sentences = [make_sentence(rng.choice(words, size=8)) for _ in range(n_sentences)]
    record = CorpusRecord(
        id=doc_id,
        document=Document.from_sentences(doc_id, sentences),
        bias=BiasQuery.from_text(make_sentence(rng.choice(words, size=5))),
        split="test",
    )
    return record, rng.normal(size=(n_sentences, dimension)), rng.normal(size=dimension)


def to_embedding_set(sentence_vectors: np.ndarray, bias_vector: np.ndarray, dimension: Optional[int] = None):
    from .embeddings import EmbeddingSet

    return EmbeddingSet(dimension or sentence_vectors.shape[1], sentence_vectors, bias_vector)
