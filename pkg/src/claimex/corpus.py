"""Articles, bias queries and reference explanations.

Everything downstream consumes :class:`CorpusRecord` objects. They are read
from the canonical JSONL format (:func:`load_jsonl_corpus`) or produced by one
of the two dataset adapters, which normalize a fact-check TSV dump or a
directory of health-review JSON files into the same shape.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ConfigurationError, CorpusFormatError

logger = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")
LABELS = ("satisfactory", "unsatisfactory", "not_applicable")

# Lowercased word before a period that must not end a sentence.
ABBREVIATIONS = frozenset(
    {"dr", "mr", "mrs", "ms", "prof", "st", "vs", "etc", "e.g", "i.e", "u.s", "jr", "sr", "no"}
)

_TERMINATOR = re.compile(r"[.!?]+[\"')\]”’]*(?=\s+[A-Z0-9\"'(\[“‘])")
_TOKEN = re.compile(r"[^\W_]+")
_LAST_WORD = re.compile(r"(\S+)$")


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    tokens: tuple[str, ...]
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    sentences: tuple[Sentence, ...]

    @classmethod
    def from_text(cls, id: str, raw_text: str) -> "Document":
        return cls(id=id, raw_text=raw_text, sentences=tuple(segment_sentences(raw_text)))

    @classmethod
    def from_sentences(cls, id: str, texts: Sequence[str]) -> "Document":
        """Build a document whose raw text is ``texts`` joined by single spaces."""
        sentences = []
        pos = 0
        for i, text in enumerate(texts):
            sentences.append(Sentence(i, text, tuple(tokenize(text)), pos, pos + len(text)))
            pos += len(text) + 1
        return cls(id=id, raw_text=" ".join(texts), sentences=tuple(sentences))

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]

    @property
    def tokens(self) -> list[str]:
        return [t for s in self.sentences for t in s.tokens]

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class BiasQuery:
    text: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("bias query text must be non-empty")

    @classmethod
    def from_text(cls, text: str) -> "BiasQuery":
        return cls(text=text, tokens=tuple(tokenize(text)))


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    document: Document
    bias: BiasQuery
    split: str
    reference_explanation: Optional[str] = None
    question_id: Optional[int] = None
    satisfactory_label: Optional[str] = None
    relevant_sentence_indices: Optional[tuple[int, ...]] = None

    @property
    def is_health_review(self) -> bool:
        return self.question_id is not None

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "article_text": self.document.raw_text,
            "bias_query": self.bias.text,
            "split": self.split,
        }
        if self.reference_explanation is not None:
            out["reference_explanation"] = self.reference_explanation
        if self.question_id is not None:
            out["question_id"] = self.question_id
            out["satisfactory_label"] = self.satisfactory_label
        if self.relevant_sentence_indices is not None:
            out["relevant_sentence_indices"] = list(self.relevant_sentence_indices)
        return out


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


_stemmer = None


def stem_tokens(tokens: Iterable[str]) -> list[str]:
    global _stemmer
    if _stemmer is None:
        from nltk.stem.porter import PorterStemmer

        _stemmer = PorterStemmer()
    return [_stemmer.stem(t) for t in tokens]


def _is_abbreviation(prefix: str) -> bool:
    m = _LAST_WORD.search(prefix)
    if m is None:
        return False
    word = m.group(1).lower().lstrip("\"'([“‘")
    return word in ABBREVIATIONS


def segment_sentences(raw_text: str) -> list[Sentence]:
    """Split ``raw_text`` into sentences.

    A boundary falls after a run of ``.``, ``!`` or ``?`` (plus any closing
    quotes or brackets) that is followed by whitespace and then an uppercase
    letter, a digit or an opening quote/bracket. A lone period directly after a
    word listed in :data:`ABBREVIATIONS` never ends a sentence.

    Each sentence keeps its character span in ``raw_text``; the text between
    consecutive spans is whitespace only.
    """
    spans = []
    start = 0
    for m in _TERMINATOR.finditer(raw_text):
        if m.group().startswith(".") and not m.group().startswith(".."):
            if _is_abbreviation(raw_text[start : m.start()]):
                continue
        spans.append((start, m.end()))
        start = m.end()
    spans.append((start, len(raw_text)))

    sentences = []
    for s, e in spans:
        chunk = raw_text[s:e]
        stripped = chunk.strip()
        if not stripped:
            continue
        lead = len(chunk) - len(chunk.lstrip())
        s0 = s + lead
        sentences.append(
            Sentence(len(sentences), stripped, tuple(tokenize(stripped)), s0, s0 + len(stripped))
        )
    return sentences


def _check_sentence_indices(value, n_sentences, where):
    if not isinstance(value, list) or not all(
        isinstance(i, int) and not isinstance(i, bool) for i in value
    ):
        raise CorpusFormatError(f"{where}: 'relevant_sentence_indices' must be a list of integers")
    bad = [i for i in value if not 0 <= i < n_sentences]
    if bad:
        raise CorpusFormatError(
            f"{where}: relevant sentence index {bad[0]} out of range for {n_sentences} sentences"
        )
    return tuple(sorted(set(value)))


def record_from_json(obj: Mapping, where: str = "record") -> CorpusRecord:
    """Validate one canonical JSON object and build a record from it."""
    if not isinstance(obj, Mapping):
        raise CorpusFormatError(f"{where}: expected a JSON object")
    for key in ("id", "article_text", "bias_query", "split"):
        if key not in obj:
            raise CorpusFormatError(f"{where}: missing field '{key}'")
        if not isinstance(obj[key], str):
            raise CorpusFormatError(f"{where}: field '{key}' must be a string")
    if not obj["id"]:
        raise CorpusFormatError(f"{where}: field 'id' must be non-empty")
    if not obj["bias_query"].strip():
        raise CorpusFormatError(f"{where}: field 'bias_query' must be non-empty")
    if obj["split"] not in SPLITS:
        raise CorpusFormatError(f"{where}: invalid 'split' {obj['split']!r}")

    reference = obj.get("reference_explanation")
    if reference is not None and not isinstance(reference, str):
        raise CorpusFormatError(f"{where}: field 'reference_explanation' must be a string")

    qid = obj.get("question_id")
    label = obj.get("satisfactory_label")
    if qid is not None:
        if not isinstance(qid, int) or isinstance(qid, bool) or not 1 <= qid <= 9:
            raise CorpusFormatError(f"{where}: invalid 'question_id' {qid!r}")
        if label is None:
            raise CorpusFormatError(f"{where}: missing field 'satisfactory_label'")
    if label is not None:
        if qid is None:
            raise CorpusFormatError(f"{where}: 'satisfactory_label' requires 'question_id'")
        if label not in LABELS:
            raise CorpusFormatError(f"{where}: invalid 'satisfactory_label' {label!r}")

    document = Document.from_text(obj["id"], obj["article_text"])
    relevant = obj.get("relevant_sentence_indices")
    if relevant is not None:
        relevant = _check_sentence_indices(relevant, len(document), where)

    return CorpusRecord(
        id=obj["id"],
        document=document,
        bias=BiasQuery.from_text(obj["bias_query"]),
        split=obj["split"],
        reference_explanation=reference,
        question_id=qid,
        satisfactory_label=label,
        relevant_sentence_indices=relevant,
    )


def load_jsonl_corpus(path) -> list[CorpusRecord]:
    records = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{where}: invalid JSON ({exc.msg})") from None
            record = record_from_json(obj, where)
            if record.id in seen:
                raise CorpusFormatError(
                    f"{where}: duplicate id {record.id!r} (first seen on line {seen[record.id]})"
                )
            seen[record.id] = lineno
            records.append(record)
    return records


def write_jsonl_corpus(records: Iterable[CorpusRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


_SPLIT_ALIASES = {
    "train": "train",
    "training": "train",
    "val": "validation",
    "valid": "validation",
    "validation": "validation",
    "dev": "validation",
    "test": "test",
}


def adapt_liarplus(path, column_map: Mapping[str, int], split: Optional[str] = None) -> list[CorpusRecord]:
    """Read a tab-separated fact-check dump into canonical records.

    ``column_map`` maps ``claim``, ``report`` and ``justification`` (required)
    and optionally ``id`` and ``split`` to 0-based column indices. When there
    is no split column every row gets ``split``. Rows must all have the column
    count of the first row.
    """
    for key in ("claim", "report", "justification"):
        if key not in column_map:
            raise ConfigurationError(f"column map is missing '{key}'")
    if "split" not in column_map and split is None:
        raise ConfigurationError("either a split column or a fixed split is required")
    if split is not None and split not in SPLITS:
        raise ConfigurationError(f"invalid split {split!r}")
    for key, idx in column_map.items():
        if not isinstance(idx, int) or idx < 0:
            raise ConfigurationError(f"column '{key}' must be a non-negative integer, got {idx!r}")

    records = []
    seen = set()
    n_cols = None
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        for rowno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if n_cols is None:
                n_cols = len(row)
                for key, idx in column_map.items():
                    if idx >= n_cols:
                        raise ConfigurationError(
                            f"column '{key}' index {idx} does not exist (file has {n_cols} columns)"
                        )
            elif len(row) != n_cols:
                raise CorpusFormatError(
                    f"{path}: row {rowno} has {len(row)} columns, expected {n_cols}"
                )
            rid = row[column_map["id"]].strip() if "id" in column_map else f"row{rowno}"
            if split is not None and "split" not in column_map:
                row_split = split
            else:
                raw = row[column_map["split"]].strip().lower()
                if raw not in _SPLIT_ALIASES:
                    raise CorpusFormatError(f"{path}: row {rowno} has unknown split {raw!r}")
                row_split = _SPLIT_ALIASES[raw]
            obj = {
                "id": rid,
                "article_text": row[column_map["report"]],
                "bias_query": row[column_map["claim"]],
                "split": row_split,
                "reference_explanation": row[column_map["justification"]],
            }
            record = record_from_json(obj, f"{path}: row {rowno}")
            if record.id in seen:
                raise CorpusFormatError(f"{path}: row {rowno} duplicates id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


_LABEL_ALIASES = {
    "satisfactory": "satisfactory",
    "unsatisfactory": "unsatisfactory",
    "not satisfactory": "unsatisfactory",
    "not_satisfactory": "unsatisfactory",
    "non-satisfactory": "unsatisfactory",
    "not_applicable": "not_applicable",
    "not applicable": "not_applicable",
    "non-applicable": "not_applicable",
    "na": "not_applicable",
    "n/a": "not_applicable",
}


def hash_split(key: str, test_fraction: float = 0.2, seed: int = 42) -> str:
    """Assign ``key`` to the test split with probability ``test_fraction``."""
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    u = int.from_bytes(digest[:8], "big") / 2**64
    return "test" if u < test_fraction else "train"


def adapt_health_reviews(directory, test_fraction: float = 0.2, seed: int = 42) -> list[CorpusRecord]:
    """Turn a directory of review JSON files into one record per question.

    Only questions 1-9 are kept; question 10 needs information beyond the
    article. All questions of a review land in the same split.
    """
    directory = Path(directory)
    records = []
    seen = set()
    for path in sorted(directory.glob("*.json")):
        with open(path, encoding="utf-8") as f:
            try:
                review = json.load(f)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: invalid JSON ({exc.msg})") from None
        rid = str(review.get("id", path.stem))
        article = review.get("article_text")
        if not isinstance(article, str) or not article.strip():
            logger.warning("skipping review %s: no article text", rid)
            continue
        document = Document.from_text(rid, article)
        split = hash_split(rid, test_fraction, seed)
        for q in sorted(review.get("questions", []), key=lambda q: q.get("question_id", 0)):
            qid = q.get("question_id")
            if not isinstance(qid, int) or not 1 <= qid <= 10:
                raise CorpusFormatError(f"{path}: invalid question_id {qid!r}")
            if qid == 10:
                continue
            label = _LABEL_ALIASES.get(str(q.get("label", "")).strip().lower())
            if label is None:
                raise CorpusFormatError(f"{path}: question {qid} has unknown label {q.get('label')!r}")
            question_text = q.get("question_text") or ""
            if not question_text.strip():
                raise CorpusFormatError(f"{path}: question {qid} has no question_text")
            relevant = q.get("relevant_sentence_indices")
            if relevant is not None:
                relevant = _check_sentence_indices(relevant, len(document), f"{path}: question {qid}")
            record = CorpusRecord(
                id=f"{rid}-q{qid}",
                document=Document(f"{rid}-q{qid}", document.raw_text, document.sentences),
                bias=BiasQuery.from_text(question_text),
                split=split,
                reference_explanation=q.get("explanation"),
                question_id=qid,
                satisfactory_label=label,
                relevant_sentence_indices=relevant,
            )
            if record.id in seen:
                raise CorpusFormatError(f"{path}: duplicate record id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


@dataclass(frozen=True)
class CorpusStats:
    total_count: int
    mean_words: float
    mean_sentences: float
    word_counts: tuple[int, ...] = field(default=(), repr=False)
    sentence_counts: tuple[int, ...] = field(default=(), repr=False)


def corpus_statistics(records: Iterable[CorpusRecord]) -> CorpusStats:
    """Count reference explanations and their mean word and sentence lengths.

    Words are :func:`tokenize` tokens and sentences come from
    :func:`segment_sentences`.
    """
    words, sents = [], []
    for r in records:
        if r.reference_explanation is None:
            continue
        words.append(len(tokenize(r.reference_explanation)))
        sents.append(len(segment_sentences(r.reference_explanation)))
    if not words:
        raise CorpusFormatError("no reference explanations to summarize")
    return CorpusStats(
        total_count=len(words),
        mean_words=sum(words) / len(words),
        mean_sentences=sum(sents) / len(sents),
        word_counts=tuple(words),
        sentence_counts=tuple(sents),
    )
