import csv
import io
import json

import numpy as np
import pytest

from claimex.cli import main
from claimex.corpus import load_jsonl_corpus, write_jsonl_corpus
from claimex.embeddings import EmbeddingSet, write_embeddings
from claimex.synthetic import planted_relevance_corpus, random_embedding_document, synthetic_health_reviews

from oracles import brute_clipped_overlap, brute_f, recursive_lcs


def write_corpus(path, objs):
    path.write_text("".join(json.dumps(o) + "\n" for o in objs), encoding="utf-8")
    return path


def rec(i, article, bias="Is the claim true?", **extra):
    return dict({"id": f"r{i}", "article_text": article, "bias_query": bias, "split": "test"}, **extra)


ARTICLES = [
    "Taxes rose last year. The mayor denied it. Schools got more money. Parks were closed.",
    "The drug cut pain by half. It costs a lot. Side effects were mild. Trials were small.",
    "Rain fell all week. Rivers rose fast. Farmers were pleased. Roads flooded in spots.",
]


@pytest.fixture
def small_corpus(tmp_path):
    return write_corpus(tmp_path / "c.jsonl", [rec(i, a, reference_explanation=a) for i, a in enumerate(ARTICLES)])


def read_lines(path):
    return [json.loads(l) for l in path.read_text().splitlines()]


class TestExplain:
    def test_one_line_per_record(self, small_corpus, tmp_path):
        out = tmp_path / "o.jsonl"
        assert main(["explain", "--corpus", str(small_corpus), "--out", str(out), "--top-k", "2"]) == 0
        rows = read_lines(out)
        assert len(rows) == 3
        assert set(rows[0]) == {"id", "method", "selected_indices", "explanation_text", "scores", "iterations", "converged"}
        assert all(len(r["selected_indices"]) == 2 for r in rows)
        meta = json.loads((tmp_path / "o.jsonl.meta.json").read_text())
        assert meta["format_version"] == 1
        assert meta["config"]["top_k"] == 2 and meta["config"]["damping"] == 0.85

    def test_textrank_ignores_bias(self, tmp_path):
        a = write_corpus(tmp_path / "a.jsonl", [rec(i, t, bias="taxes drug rain") for i, t in enumerate(ARTICLES)])
        b = write_corpus(tmp_path / "b.jsonl", [rec(i, t, bias="schools parks farmers") for i, t in enumerate(ARTICLES)])
        for src, dst in ((a, "oa"), (b, "ob")):
            assert main(["explain", "--corpus", str(src), "--method", "textrank", "--out", str(tmp_path / dst)]) == 0
        assert (tmp_path / "oa").read_bytes() == (tmp_path / "ob").read_bytes()

    def test_unknown_method_is_usage_error(self, small_corpus, capsys):
        assert main(["explain", "--corpus", str(small_corpus), "--method", "lexrank"]) == 2
        assert "invalid choice" in capsys.readouterr().err

    def test_bad_damping_is_usage_error(self, small_corpus):
        assert main(["explain", "--corpus", str(small_corpus), "--damping", "1.5"]) == 2

    def test_bad_embedder_is_usage_error(self, small_corpus):
        assert main(["explain", "--corpus", str(small_corpus), "--embedder", "sbert"]) == 2

    def test_data_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "x"}\n')
        assert main(["explain", "--corpus", str(bad)]) == 1
        assert "missing field" in capsys.readouterr().err

    def test_missing_corpus_file(self, tmp_path):
        assert main(["explain", "--corpus", str(tmp_path / "nope.jsonl")]) == 1

    def test_jobs_preserve_order(self, tmp_path):
        recs = planted_relevance_corpus(12, seed=3)
        write_jsonl_corpus(recs, tmp_path / "c.jsonl")
        outs = []
        for jobs in ("1", "4"):
            out = tmp_path / f"o{jobs}"
            assert main(["explain", "--corpus", str(tmp_path / "c.jsonl"), "--jobs", jobs, "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_file_embedder_and_cache(self, tmp_path):
        record, vecs, bias = random_embedding_document(8, 16, seed=2, doc_id="doc1")
        write_jsonl_corpus([record], tmp_path / "c.jsonl")
        emb_dir = tmp_path / "emb"
        emb_dir.mkdir()
        write_embeddings(emb_dir / "doc1.emb", EmbeddingSet(16, vecs, bias))
        args = ["explain", "--corpus", str(tmp_path / "c.jsonl"), "--embedder", f"file:{emb_dir}"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        cache = tmp_path / "cache"
        assert main(args + ["--cache-dir", str(cache), "--out", str(tmp_path / "b")]) == 0
        assert len(list(cache.rglob("*.npz"))) == 1
        assert main(args + ["--cache-dir", str(cache), "--out", str(tmp_path / "c")]) == 0
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes() == (tmp_path / "c").read_bytes()


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestEvaluate:
    def test_generated_equals_reference(self, small_corpus, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["evaluate", "--corpus", str(small_corpus), "--method", "textrank", "--out", str(out)]) == 0
        assert out.read_text() == "method,rouge1_f,rouge2_f,rougeL_f\ntextrank,100.00,100.00,100.00\n"

    def test_hand_aggregation(self, tmp_path):
        recs = planted_relevance_corpus(20, seed=9)
        corpus = tmp_path / "c.jsonl"
        write_jsonl_corpus(recs, corpus)
        out = tmp_path / "t.csv"
        methods = ["biased-textrank", "textrank", "embedding-similarity"]
        argv = ["evaluate", "--corpus", str(corpus), "--out", str(out)]
        for m in methods:
            argv += ["--method", m]
        assert main(argv) == 0
        rows = {r["method"]: r for r in parse_csv(out.read_text())}
        assert list(rows) == methods
        refs = {r.id: r.reference_explanation.lower() for r in recs}
        for m in methods:
            explained = tmp_path / f"{m}.jsonl"
            assert main(["explain", "--corpus", str(corpus), "--method", m, "--out", str(explained)]) == 0
            f1s = {1: [], 2: [], "L": []}
            for row in read_lines(explained):
                cand = [w.strip(".") for w in row["explanation_text"].lower().split()]
                ref = [w.strip(".") for w in refs[row["id"]].split()]
                for n in (1, 2):
                    f1s[n].append(brute_f(*brute_clipped_overlap(cand, ref, n))[2])
                f1s["L"].append(brute_f(recursive_lcs(cand, ref), len(cand), len(ref))[2])
            assert rows[m]["rouge1_f"] == f"{100 * np.mean(f1s[1]):.2f}"
            assert rows[m]["rouge2_f"] == f"{100 * np.mean(f1s[2]):.2f}"
            assert rows[m]["rougeL_f"] == f"{100 * np.mean(f1s['L']):.2f}"

    def test_no_references(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.jsonl", [rec(0, ARTICLES[0])])
        assert main(["evaluate", "--corpus", str(corpus)]) == 1

    def test_relevant_sentence_mode(self, tmp_path):
        corpus = write_corpus(
            tmp_path / "c.jsonl", [rec(0, ARTICLES[0], relevant_sentence_indices=[0, 1, 2, 3])]
        )
        out = tmp_path / "t.csv"
        argv = ["evaluate", "--corpus", str(corpus), "--method", "textrank", "--reference-mode", "relevant-sentences"]
        assert main(argv + ["--out", str(out)]) == 0
        assert out.read_text().splitlines()[1] == "textrank,100.00,100.00,100.00"

    def test_health_reviews_score_satisfactory_only(self, tmp_path):
        a = ARTICLES[0]
        corpus = write_corpus(
            tmp_path / "c.jsonl",
            [
                rec(0, a, reference_explanation=a, question_id=1, satisfactory_label="satisfactory"),
                rec(1, a, reference_explanation="unrelated words", question_id=1, satisfactory_label="unsatisfactory"),
            ],
        )
        out = tmp_path / "t.csv"
        assert main(["evaluate", "--corpus", str(corpus), "--method", "textrank", "--out", str(out)]) == 0
        assert out.read_text().splitlines()[1] == "textrank,100.00,100.00,100.00"


class TestBench:
    def test_single_document(self, tmp_path):
        record, vecs, bias = random_embedding_document(10, 8, seed=1, doc_id="d")
        write_jsonl_corpus([record], tmp_path / "c.jsonl")
        (tmp_path / "emb").mkdir()
        write_embeddings(tmp_path / "emb" / "d.emb", EmbeddingSet(8, vecs, bias))
        out = tmp_path / "b.json"
        argv = ["bench", "--corpus", str(tmp_path / "c.jsonl"), "--embedder", f"file:{tmp_path / 'emb'}"]
        assert main(argv + ["--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["samples"] == 1 and len(report["per_document"]) == 1
        assert report["p50_ms"] == report["per_document"][0]["ms"]

    def test_empty_corpus(self, tmp_path):
        (tmp_path / "c.jsonl").write_text("")
        assert main(["bench", "--corpus", str(tmp_path / "c.jsonl")]) == 1


class TestStats:
    def test_hand_counts(self, tmp_path):
        corpus = write_corpus(
            tmp_path / "c.jsonl",
            [
                rec(0, "x", reference_explanation="one two three four."),
                rec(1, "y", reference_explanation="One two three. Four five six."),
            ],
        )
        out = tmp_path / "s.csv"
        assert main(["stats", "--corpus", str(corpus), "--out", str(out)]) == 0
        assert out.read_text() == "total_count,avg_words,avg_sentences\n2,5.00,1.50\n"

    def test_no_references(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.jsonl", [rec(0, "x")])
        assert main(["stats", "--corpus", str(corpus)]) == 1


class TestPrune:
    def test_rounds(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.jsonl", [rec(0, ARTICLES[0], bias="mayor taxes")])
        out = tmp_path / "p.jsonl"
        assert main(["prune", "--corpus", str(corpus), "--rounds", "5", "--out", str(out)]) == 0
        (row,) = read_lines(out)
        assert [len(r["remaining_indices"]) for r in row["rounds"]] == [3, 2, 1]


class TestIngest:
    def test_liarplus(self, tmp_path):
        tsv = tmp_path / "l.tsv"
        tsv.write_text("a1\tHalf are poor.\tThe report. It says so.\tRuling text.\n")
        out = tmp_path / "c.jsonl"
        argv = ["ingest", "--format", "liarplus", "--input", str(tsv), "--out", str(out)]
        argv += ["--id-col", "0", "--claim-col", "1", "--report-col", "2", "--justification-col", "3", "--split", "train"]
        assert main(argv) == 0
        (r,) = load_jsonl_corpus(out)
        assert (r.id, r.bias.text, r.reference_explanation) == ("a1", "Half are poor.", "Ruling text.")

    def test_liarplus_missing_columns(self, tmp_path):
        argv = ["ingest", "--format", "liarplus", "--input", str(tmp_path), "--out", str(tmp_path / "o")]
        assert main(argv) == 2

    def test_liarplus_bad_column(self, tmp_path):
        tsv = tmp_path / "l.tsv"
        tsv.write_text("a\tb\tc\n")
        argv = ["ingest", "--format", "liarplus", "--input", str(tsv), "--out", str(tmp_path / "o")]
        argv += ["--claim-col", "0", "--report-col", "1", "--justification-col", "7", "--split", "test"]
        assert main(argv) == 2

    def test_health_reviews(self, tmp_path):
        d = tmp_path / "reviews"
        d.mkdir()
        for r in synthetic_health_reviews(4, seed=1):
            (d / f"{r['id']}.json").write_text(json.dumps(r))
        out = tmp_path / "c.jsonl"
        assert main(["ingest", "--format", "health-reviews", "--input", str(d), "--out", str(out)]) == 0
        recs = load_jsonl_corpus(out)
        assert len(recs) == 36
        assert {r.question_id for r in recs} == set(range(1, 10))


class TestDownstream:
    def test_two_methods(self, tmp_path, capsys):
        d = tmp_path / "reviews"
        d.mkdir()
        for r in synthetic_health_reviews(40, seed=4):
            (d / f"{r['id']}.json").write_text(json.dumps(r))
        corpus = tmp_path / "c.jsonl"
        assert main(["ingest", "--format", "health-reviews", "--input", str(d), "--out", str(corpus)]) == 0
        out, table = tmp_path / "d.jsonl", tmp_path / "d.csv"
        argv = ["downstream", "--corpus", str(corpus), "--question", "1", "--question", "2", "--runs", "3"]
        argv += ["--method", "biased-textrank", "--method", "random", "--out", str(out), "--table", str(table)]
        assert main(argv) == 0
        reports = read_lines(out)
        assert [(r["question_id"], r["method"]) for r in reports] == [
            (1, "biased-textrank"), (2, "biased-textrank"), (None, "biased-textrank"),
            (1, "random"), (2, "random"), (None, "random"),
        ]
        assert all(len(r["per_run"]) == 3 for r in reports)
        rows = parse_csv(table.read_text())
        assert [r["question_id"] for r in rows] == ["1", "2", "all", "1", "2", "all"]
        meta = json.loads((tmp_path / "d.jsonl.meta.json").read_text())
        assert "biased-textrank vs random" in meta["t_tests"]
