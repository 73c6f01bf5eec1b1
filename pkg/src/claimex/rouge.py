"""ROUGE-1, ROUGE-2 and ROUGE-L between token sequences.

ROUGE-N uses clipped n-gram counts; ROUGE-L is the sentence-level variant
computed on the longest common subsequence of the two full token sequences.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import stem_tokens, tokenize
from .errors import EvaluationError

METRICS = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(precision, recall, f1)


ZERO = RougeScore(0.0, 0.0, 0.0)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> RougeScore:
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    if not cand or not ref:
        return ZERO
    overlap = sum((cand & ref).values())
    return RougeScore.from_pr(overlap / sum(cand.values()), overlap / sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    if not candidate or not reference:
        return ZERO
    lcs = lcs_length(candidate, reference)
    return RougeScore.from_pr(lcs / len(candidate), lcs / len(reference))


def rouge_all(candidate: Sequence[str], reference: Sequence[str]) -> dict[str, RougeScore]:
    return {
        "rouge1": rouge_n(candidate, reference, 1),
        "rouge2": rouge_n(candidate, reference, 2),
        "rougeL": rouge_l(candidate, reference),
    }


def rouge_tokens(text: str, stemming: bool = False) -> list[str]:
    tokens = tokenize(text)
    return stem_tokens(tokens) if stemming else tokens


def corpus_rouge(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> dict[str, RougeScore]:
    """Mean precision, recall and F per metric over (candidate, reference) token pairs."""
    sums = {m: [0.0, 0.0, 0.0] for m in METRICS}
    count = 0
    for cand, ref in pairs:
        for m, score in rouge_all(cand, ref).items():
            acc = sums[m]
            acc[0] += score.precision
            acc[1] += score.recall
            acc[2] += score.f1
        count += 1
    if count == 0:
        raise EvaluationError("no candidate/reference pairs to score")
    return {m: RougeScore(p / count, r / count, f / count) for m, (p, r, f) in sums.items()}


def format_rouge_csv(rows: Mapping[str, Mapping[str, RougeScore]]) -> str:
    """CSV with one line per method and F-scores x100 at two decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "rouge1_f", "rouge2_f", "rougeL_f"])
    for method, scores in rows.items():
        writer.writerow([method] + [f"{100 * scores[m].f1:.2f}" for m in METRICS])
    return buf.getvalue()


def format_rouge_table(rows: Mapping[str, Mapping[str, RougeScore]], title: str = "") -> str:
    width = max([len("Model")] + [len(m) for m in rows])
    lines = [title] if title else []
    lines.append(f"{'Model':<{width}}  ROUGE-1  ROUGE-2  ROUGE-L")
    for method, scores in rows.items():
        cells = "  ".join(f"{100 * scores[m].f1:7.2f}" for m in METRICS)
        lines.append(f"{method:<{width}}  {cells}")
    return "\n".join(lines) + "\n"
