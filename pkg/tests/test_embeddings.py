import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from claimex.corpus import BiasQuery, Document
from claimex.embeddings import (
    EmbeddingSet,
    FileEmbedder,
    TfidfModel,
    cosine_similarity,
    embed_document,
    embed_tfidf,
    fit_tfidf,
    load_embeddings,
    write_embeddings,
)
from claimex.errors import EmbeddingFormatError


def doc(*sentences):
    return Document.from_sentences("d", list(sentences))


class TestFitTfidf:
    def test_two_docs(self):
        m = fit_tfidf([doc("a b"), doc("b c")])
        assert m.vocabulary == {"a": 0, "b": 1, "c": 2}
        assert m.document_frequencies == {"a": 1, "b": 2, "c": 1}
        assert m.corpus_size == 2

    def test_document_not_term_frequency(self):
        assert fit_tfidf([doc("x x x")]).document_frequencies == {"x": 1}

    def test_empty_corpus(self):
        with pytest.raises(ValueError, match="empty vocabulary"):
            fit_tfidf([doc(), Document.from_text("e", "  ")])

    def test_order_independent(self):
        a, b = doc("zeta alpha"), doc("beta alpha. gamma")
        m1, m2 = fit_tfidf([a, b]), fit_tfidf([b, a])
        assert m1 == m2
        assert list(m1.vocabulary) == sorted(m1.vocabulary)


class TestEmbedTfidf:
    MODEL = TfidfModel({"a": 0, "b": 1}, {"a": 1, "b": 2}, 2)

    def test_empty_and_oov(self):
        assert not embed_tfidf(self.MODEL, []).any()
        assert not embed_tfidf(self.MODEL, ["zzz", "q"]).any()

    def test_single_token(self):
        v = embed_tfidf(self.MODEL, ["a"])
        assert v.tolist() == [1.0, 0.0]

    def test_formula(self):
        # hand evaluation of tf * (ln((N+1)/(df+1)) + 1), then L2 normalization
        wa = 2 * (math.log(3 / 2) + 1)
        wb = 1 * (math.log(3 / 3) + 1)
        norm = math.hypot(wa, wb)
        v = embed_tfidf(self.MODEL, ["a", "b", "a", "oov"])
        assert v == pytest.approx([wa / norm, wb / norm], abs=1e-12)

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=8))
    def test_norm_is_one_or_zero(self, toks):
        n = np.linalg.norm(embed_tfidf(self.MODEL, toks))
        assert n == 0.0 or abs(n - 1.0) < 1e-12

    def test_embed_document(self):
        d = doc("A b.", "Zzz.")
        m = fit_tfidf([d])
        e = embed_document(m, d, BiasQuery.from_text("a"))
        assert e.sentence_vectors.shape == (2, 3)
        assert not e.sentence_vectors[1][:2].any()


class TestCosine:
    def test_examples(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0
        assert cosine_similarity([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), abs=1e-8)

    def test_zero_vector(self):
        assert cosine_similarity([0, 0], [1, 1]) == 0.0

    def test_mismatch(self):
        with pytest.raises(ValueError):
            cosine_similarity([1, 0], [1, 0, 0])

    vec = arrays(np.float64, 5, elements=st.floats(-100, 100, allow_nan=False))

    @given(vec, vec, st.floats(1e-3, 1e3))
    def test_properties(self, u, v, c):
        assert cosine_similarity(u, v) == cosine_similarity(v, u)
        assert -1.0 <= cosine_similarity(u, v) <= 1.0
        if np.linalg.norm(u) > 1e-6:
            assert cosine_similarity(u, u) == pytest.approx(1.0, abs=1e-9)
            assert cosine_similarity(c * u, v) == pytest.approx(cosine_similarity(u, v), abs=1e-9)


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadEmbeddings:
    DOC = doc("S0.", "S1.", "S2.", "S3.", "S4.")
    BIAS = BiasQuery.from_text("bias")

    def test_valid(self, tmp_path):
        p = tmp_path / "e.emb"
        _write(p, ["dim 4"] + [f"{i}\t{i} 0 1 0.5" for i in range(5)] + ["bias\t1 1 1 1"])
        e = load_embeddings(p, self.DOC, self.BIAS)
        assert e.dimension == 4
        assert e.sentence_vectors[3].tolist() == [3, 0, 1, 0.5]
        assert e.bias_vector.tolist() == [1, 1, 1, 1]

    def test_missing_sentence(self, tmp_path):
        p = tmp_path / "e.emb"
        _write(p, ["dim 4"] + [f"{i}\t1 0 1 0" for i in (0, 1, 2, 4)] + ["bias\t1 1 1 1"])
        with pytest.raises(EmbeddingFormatError, match="missing vector: 3"):
            load_embeddings(p, self.DOC, self.BIAS)

    def test_mixed_dims(self, tmp_path):
        p = tmp_path / "e.emb"
        _write(p, ["dim 4", "0\t1 0 1 0", "1\t1 0 1 0 7"])
        with pytest.raises(EmbeddingFormatError, match="dimension mismatch"):
            load_embeddings(p, self.DOC, self.BIAS)

    @pytest.mark.parametrize("value", ["nan", "inf", "-inf"])
    def test_non_finite(self, tmp_path, value):
        p = tmp_path / "e.emb"
        _write(p, ["dim 2", f"0\t1 {value}"])
        with pytest.raises(EmbeddingFormatError, match="non-finite"):
            load_embeddings(p, self.DOC, self.BIAS)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "e.emb"
        _write(p, ["dimension 4"])
        with pytest.raises(EmbeddingFormatError, match="header"):
            load_embeddings(p, self.DOC, self.BIAS)

    def test_write_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        e = EmbeddingSet(3, rng.normal(size=(5, 3)), rng.normal(size=3))
        write_embeddings(tmp_path / "x.emb", e)
        back = load_embeddings(tmp_path / "x.emb", self.DOC, self.BIAS)
        assert np.array_equal(back.sentence_vectors, e.sentence_vectors)
        assert np.array_equal(back.bias_vector, e.bias_vector)

    def test_file_embedder_missing_file(self, tmp_path):
        from claimex.corpus import CorpusRecord

        rec = CorpusRecord("nope", self.DOC, self.BIAS, "test")
        with pytest.raises(EmbeddingFormatError, match="no embedding file"):
            FileEmbedder(tmp_path).embed(rec)


def test_embedding_set_validates():
    with pytest.raises(EmbeddingFormatError):
        EmbeddingSet(2, np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(EmbeddingFormatError):
        EmbeddingSet(2, np.array([[np.nan, 0]]), np.zeros(2))
