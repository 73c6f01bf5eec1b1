"""``claimex`` command line: explain, evaluate, downstream, prune, bench, stats, ingest.

Exit codes: 0 success, 1 data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .corpus import adapt_health_reviews, adapt_liarplus, corpus_statistics, load_jsonl_corpus, write_jsonl_corpus
from .downstream import (
    TrainConfig,
    aggregate_reports,
    dumps_reports,
    format_downstream_csv,
    run_downstream_protocol,
    welch_t_test,
)
from .errors import ClaimexError, ConfigurationError
from .pipeline import METHODS, explain_corpus, make_embedder
from .ranking import RankParams, prune_least_relevant, rank_document
from .rouge import corpus_rouge, format_rouge_csv, format_rouge_table, rouge_tokens

FORMAT_VERSION = 1
EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
TABLE3_METHODS = ["biased-textrank", "textrank", "embedding-similarity"]

log = logging.getLogger("claimex")


class UsageError(Exception):
    pass


def _config(args) -> dict:
    skip = {"func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _write_meta(args, extra: Optional[dict] = None):
    meta = {"format_version": FORMAT_VERSION, "claimex_version": __version__, "config": _config(args)}
    if extra:
        meta.update(extra)
    text = json.dumps(meta, sort_keys=True, indent=2) + "\n"
    if args.out is not None:
        Path(str(args.out) + ".meta.json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _params(args) -> RankParams:
    try:
        return RankParams(args.damping, args.tol, args.max_iter, args.top_k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    records = load_jsonl_corpus(args.corpus)
    embedder = None
    if args.method != "random":
        embedder = make_embedder(args.embedder, records, args.cache_dir)
    return records, embedder


def cmd_explain(args) -> int:
    params = _params(args)
    records, embedder = _load(args)
    results = explain_corpus(records, embedder, args.method, params, args.seed, args.jobs)
    with _output(args.out) as f:
        for record, res in zip(records, results):
            f.write(res.dumps(record.id, args.method) + "\n")
    _write_meta(args, {"records": len(records)})
    return EXIT_OK


def reference_pairs(records, results, mode: str, stemming: bool = False):
    """(candidate, reference) token pairs for the records usable under ``mode``.

    ``explanation`` uses ``reference_explanation``; for health-review records
    only satisfactory answers count. ``relevant-sentences`` uses the article
    sentences listed in ``relevant_sentence_indices``.
    """
    pairs = []
    for record, res in zip(records, results):
        if mode == "explanation":
            if record.reference_explanation is None:
                continue
            if record.is_health_review and record.satisfactory_label != "satisfactory":
                continue
            reference = record.reference_explanation
        else:
            if not record.relevant_sentence_indices:
                continue
            texts = record.document.texts
            reference = " ".join(texts[i] for i in record.relevant_sentence_indices)
        pairs.append((rouge_tokens(res.explanation_text, stemming), rouge_tokens(reference, stemming)))
    return pairs


def cmd_evaluate(args) -> int:
    params = _params(args)
    methods = args.method or TABLE3_METHODS
    records = load_jsonl_corpus(args.corpus)
    embedder = None
    if any(m != "random" for m in methods):
        embedder = make_embedder(args.embedder, records, args.cache_dir)
    rows = {}
    for method in methods:
        results = explain_corpus(records, embedder, method, params, args.seed, args.jobs)
        pairs = reference_pairs(records, results, args.reference_mode, args.stemming)
        if not pairs:
            raise ClaimexError(f"no records with references for mode {args.reference_mode!r}")
        rows[method] = corpus_rouge(pairs)
    with _output(args.out) as f:
        f.write(format_rouge_csv(rows))
    title = f"ROUGE F x100 ({args.reference_mode} references, {len(pairs)} records)"
    human = sys.stderr if args.out is None else sys.stdout
    human.write(format_rouge_table(rows, title))
    _write_meta(args, {"scored_records": len(pairs)})
    return EXIT_OK


def cmd_downstream(args) -> int:
    params = _params(args)
    methods = args.method or ["biased-textrank"]
    records = load_jsonl_corpus(args.corpus)
    questions = args.question or sorted({r.question_id for r in records if r.question_id is not None})
    if not questions:
        raise ClaimexError("corpus has no health-review questions")
    embedder = None
    if args.embedder != "tfidf" or args.cache_dir is not None:
        embedder = make_embedder(args.embedder, records, args.cache_dir)
    config = TrainConfig(args.epochs, args.learning_rate, 0)
    reports, aggregates = [], {}
    for method in methods:
        per_q = [
            run_downstream_protocol(records, method, q, args.runs, embedder, params, config, args.seed)
            for q in questions
        ]
        reports.extend(per_q)
        aggregates[method] = aggregate_reports(per_q)
        reports.append(aggregates[method])
    with _output(args.out) as f:
        f.write(dumps_reports(reports))
    table = format_downstream_csv(reports)
    if args.table is not None:
        Path(args.table).write_text(table, encoding="utf-8")
    else:
        (sys.stdout if args.out is not None else sys.stderr).write(table)

    tests = {}
    if len(methods) > 1 and args.runs > 1:
        base = aggregates[methods[0]]
        for other in methods[1:]:
            t = welch_t_test(base.metric("accuracy"), aggregates[other].metric("accuracy"))
            tests[f"{methods[0]} vs {other}"] = {"t": t.t, "p": t.p, "df": t.df, "degenerate": t.degenerate}
            sys.stderr.write(f"welch t-test accuracy {methods[0]} vs {other}: t={t.t:.4f} p={t.p:.4g}\n")
    _write_meta(args, {"questions": questions, "t_tests": tests})
    return EXIT_OK


def cmd_prune(args) -> int:
    params = _params(args)
    records = load_jsonl_corpus(args.corpus)
    embedder = make_embedder(args.embedder, records, args.cache_dir)
    with _output(args.out) as f:
        for record in records:
            steps = prune_least_relevant(
                record.document, embedder.embed(record), args.rounds, params, rerank=args.rerank
            )
            remaining = list(range(len(record.document)))
            rounds = []
            for step in steps:
                remaining.remove(step.removed_index)
                rounds.append(
                    {
                        "removed_index": step.removed_index,
                        "remaining_indices": list(remaining),
                        "text": step.document.raw_text,
                    }
                )
            f.write(json.dumps({"id": record.id, "rounds": rounds}, ensure_ascii=False) + "\n")
    _write_meta(args, {"records": len(records)})
    return EXIT_OK


def bench_ranking(records, embedder, params: RankParams, warmup: int = 1) -> dict:
    """Time graph build + power iteration + selection per document.

    Embeddings are computed up front and excluded from the timing.
    """
    if not records:
        raise ClaimexError("empty corpus")
    prepared = [(r, embedder.embed(r)) for r in records]
    for r, emb in prepared[:1] * warmup:
        rank_document(emb, r.document, params)
    samples = []
    for r, emb in prepared:
        t0 = time.perf_counter()
        rank_document(emb, r.document, params)
        samples.append((r.id, len(r.document), (time.perf_counter() - t0) * 1000.0))
    ms = np.array([s[2] for s in samples])
    return {
        "samples": len(samples),
        "p50_ms": float(np.percentile(ms, 50)),
        "p95_ms": float(np.percentile(ms, 95)),
        "mean_ms": float(ms.mean()),
        "max_ms": float(ms.max()),
        "per_document": [{"id": i, "n_sentences": n, "ms": t} for i, n, t in samples],
    }


def cmd_bench(args) -> int:
    params = _params(args)
    records = load_jsonl_corpus(args.corpus)
    if not records:
        raise ClaimexError("empty corpus")
    embedder = make_embedder(args.embedder, records, args.cache_dir)
    report = bench_ranking(records, embedder, params, args.warmup)
    report["format_version"] = FORMAT_VERSION
    report["config"] = _config(args)
    with _output(args.out) as f:
        f.write(json.dumps(report, indent=2) + "\n")
    sys.stderr.write(
        f"{report['samples']} documents: p50 {report['p50_ms']:.3f} ms, p95 {report['p95_ms']:.3f} ms\n"
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    records = load_jsonl_corpus(args.corpus)
    stats = corpus_statistics(records)
    with _output(args.out) as f:
        f.write("total_count,avg_words,avg_sentences\n")
        f.write(f"{stats.total_count},{stats.mean_words:.2f},{stats.mean_sentences:.2f}\n")
    _write_meta(args)
    return EXIT_OK


def cmd_ingest(args) -> int:
    if args.format == "liarplus":
        if None in (args.claim_col, args.report_col, args.justification_col):
            raise UsageError("liarplus needs --claim-col, --report-col and --justification-col")
        column_map = {"claim": args.claim_col, "report": args.report_col, "justification": args.justification_col}
        if args.id_col is not None:
            column_map["id"] = args.id_col
        if args.split_col is not None:
            column_map["split"] = args.split_col
        records = adapt_liarplus(args.input, column_map, args.split)
    else:
        records = adapt_health_reviews(args.input, args.test_fraction, args.seed)
    write_jsonl_corpus(records, args.out)
    _write_meta(args, {"records": len(records)})
    return EXIT_OK


def _add_ranking_flags(p, method_multi: bool = False):
    p.add_argument("--corpus", required=True, type=Path, help="canonical JSONL corpus")
    p.add_argument("--embedder", default="tfidf", help="'tfidf' or 'file:<dir>' with <id>.emb files")
    if method_multi:
        p.add_argument("--method", action="append", choices=METHODS, help="repeatable")
    else:
        p.add_argument("--method", default="biased-textrank", choices=METHODS)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", type=Path)
    p.add_argument("--stemming", action="store_true", help="Porter-stem tokens before ROUGE")
    p.add_argument("--cache-dir", type=Path, help="cache embeddings per (corpus, embedder)")
    p.add_argument("--jobs", type=int, default=1, help="records processed concurrently")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="write one ranked explanation per record (JSONL)")
    _add_ranking_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("evaluate", help="ROUGE F table per method (CSV)")
    _add_ranking_flags(p, method_multi=True)
    p.add_argument("--reference-mode", choices=["explanation", "relevant-sentences"], default="explanation")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("downstream", help="per-question satisfactoriness classifiers")
    _add_ranking_flags(p, method_multi=True)
    p.add_argument("--question", type=int, action="append", choices=range(1, 10), help="repeatable")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--table", type=Path, help="CSV table path")
    p.set_defaults(func=cmd_downstream)

    p = sub.add_parser("prune", help="drop the least relevant sentences one at a time")
    _add_ranking_flags(p)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--rerank", action="store_true", help="re-rank after every removal")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("bench", help="ranking latency per document")
    _add_ranking_flags(p)
    p.add_argument("--warmup", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="reference explanation counts and lengths")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ingest", help="convert a dataset dump to canonical JSONL")
    p.add_argument("--format", required=True, choices=["liarplus", "health-reviews"])
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--claim-col", type=int, help="0-based column index (liarplus)")
    p.add_argument("--report-col", type=int)
    p.add_argument("--justification-col", type=int)
    p.add_argument("--id-col", type=int)
    p.add_argument("--split-col", type=int)
    p.add_argument("--split", choices=["train", "validation", "test"])
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"claimex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader (e.g. `head`) went away; silence the flush at interpreter exit too
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (ClaimexError, ValueError, OSError) as exc:
        print(f"claimex: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
