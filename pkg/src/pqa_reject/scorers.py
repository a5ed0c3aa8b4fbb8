"""Relevance scoring of review sentences against a question.

Two score sources are supported: a built-in Okapi BM25 scorer and score
files produced by an external model. Raw scores are mapped to
probabilities with ``s / (s + 1)``, which is the logistic sigmoid applied
to ``log(s)``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from ._jsonl import read_records, require, write_records
from .errors import DataError, IntegrityError, ParseError, ValidationError

K1 = 1.2
B = 0.75
DEFAULT_DEPTH = 10

SCORE_KINDS = ("probability", "raw")

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


class EmptyQueryError(ValidationError):
    """The question has no tokens left to score with."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace, punctuation and underscores."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class CollectionStatistics:
    n_docs: int
    avg_length: float
    doc_freq: Mapping[str, int]

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "CollectionStatistics":
        df: Counter = Counter()
        n = 0
        total = 0
        for text in texts:
            tokens = tokenize(text)
            df.update(set(tokens))
            total += len(tokens)
            n += 1
        return cls(n, total / n if n else 0.0, MappingProxyType(dict(df)))

    def idf(self, term: str) -> float:
        # always positive, unlike the classic Robertson-Sparck Jones form
        df = self.doc_freq.get(term, 0)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))


def lexical_score(question_text, review_text, stats: CollectionStatistics,
                  k1: float = K1, b: float = B) -> float:
    """Okapi BM25 score of ``review_text`` for the query ``question_text``.

    Repeated query terms contribute once per occurrence.
    """
    query = tokenize(question_text)
    if not query:
        raise EmptyQueryError(f"question {question_text!r} has no scorable terms")
    doc = tokenize(review_text)
    tf = Counter(doc)
    avgdl = stats.avg_length or 1.0
    norm = k1 * (1.0 - b + b * len(doc) / avgdl)
    score = 0.0
    for term in query:
        f = tf.get(term, 0)
        if f:
            score += stats.idf(term) * f * (k1 + 1.0) / (f + norm)
    return score


def score_to_probability(raw_score: float, kind: str = "raw") -> float:
    """Convert a scorer's output into a positive-class probability.

    ``kind="probability"`` passes the value through after a range check.
    Raw scores at or below zero are floored to probability 0.
    """
    if kind == "probability":
        if not 0.0 <= raw_score <= 1.0:
            raise ValidationError(f"probability score {raw_score} outside [0, 1]")
        return float(raw_score)
    if kind != "raw":
        raise ValidationError(f"unknown score kind {kind!r}")
    if math.isnan(raw_score):
        raise ValidationError("raw score is NaN")
    if raw_score <= 0.0:
        return 0.0
    if math.isinf(raw_score):
        return 1.0
    return raw_score / (raw_score + 1.0)


@dataclass(frozen=True)
class ScoredCandidate:
    question_id: str
    review_id: str
    raw_score: float
    probability: float


class ScoreTable(Mapping):
    """Read-only mapping ``(question_id, review_id) -> ScoredCandidate``."""

    def __init__(self, candidates: Iterable[ScoredCandidate], kind: str, name: str = "external"):
        if kind not in SCORE_KINDS:
            raise ValidationError(f"unknown score kind {kind!r}")
        self.kind = kind
        self.name = name
        table = {}
        by_q: dict[str, list[str]] = {}
        for c in candidates:
            key = (c.question_id, c.review_id)
            if key in table:
                raise IntegrityError(f"duplicate score for {key}")
            table[key] = c
            by_q.setdefault(c.question_id, []).append(c.review_id)
        self._table = table
        self._by_q = {q: tuple(sorted(r)) for q, r in by_q.items()}

    @classmethod
    def from_scores(cls, scores: Mapping[tuple[str, str], float], kind: str, name="external"):
        return cls(
            (ScoredCandidate(q, r, float(s), score_to_probability(float(s), kind))
             for (q, r), s in scores.items()),
            kind,
            name,
        )

    def __getitem__(self, key):
        return self._table[key]

    def __iter__(self):
        return iter(self._table)

    def __len__(self):
        return len(self._table)

    def reviews_for(self, question_id) -> tuple[str, ...]:
        return self._by_q.get(question_id, ())


def load_external_scores(path, kind: str | None = None) -> ScoreTable:
    """Read a score file.

    The first record may be a header ``{"score_kind": ...}``; an optional
    ``"name"`` there labels the scorer in reports. ``kind`` overrides the
    header. Without either, the file is rejected.
    """
    records = list(read_records(path))
    header = {}
    if records and "score_kind" in records[0][1]:
        header = records.pop(0)[1]
    kind = kind or header.get("score_kind")
    if kind is None:
        raise DataError(f"{path}: no score_kind header and none given")
    if kind not in SCORE_KINDS:
        raise ValidationError(f"{path}: unknown score_kind {kind!r}")
    name = str(header.get("name") or Path(path).stem)
    seen = set()
    out = []
    for line_no, rec in records:
        qid = str(require(rec, "question_id", path, line_no))
        rid = str(require(rec, "review_id", path, line_no))
        score = require(rec, "score", path, line_no)
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ParseError(path, line_no, f"score must be a number, got {score!r}")
        if (qid, rid) in seen:
            raise IntegrityError(f"{path}:{line_no}: duplicate score for ({qid!r}, {rid!r})")
        seen.add((qid, rid))
        try:
            prob = score_to_probability(float(score), kind)
        except ValidationError as exc:
            raise ValidationError(f"{path}:{line_no}: {exc}") from None
        out.append(ScoredCandidate(qid, rid, float(score), prob))
    return ScoreTable(out, kind, name)


def write_scores(path, scores: Mapping[tuple[str, str], float], kind: str, name=None):
    header = {"score_kind": kind}
    if name:
        header["name"] = name
    rows = [{"question_id": q, "review_id": r, "score": s} for (q, r), s in sorted(scores.items())]
    write_records(path, [header, *rows])


class LexicalScorer:
    """BM25 over every review sentence of a corpus."""

    kind = "raw"
    name = "lexical"

    def __init__(self, corpus, k1: float = K1, b: float = B):
        self.corpus = corpus
        self.k1 = k1
        self.b = b
        self.stats = CollectionStatistics.from_texts(
            corpus.reviews[rid].text for rid in sorted(corpus.reviews)
        )

    def score(self, question_id, review_id) -> ScoredCandidate:
        raw = lexical_score(
            self.corpus.questions[question_id].text,
            self.corpus.reviews[review_id].text,
            self.stats,
            self.k1,
            self.b,
        )
        return ScoredCandidate(question_id, review_id, raw, score_to_probability(raw, "raw"))

    def table(self, pairs: Iterable[tuple[str, str]]) -> ScoreTable:
        return ScoreTable((self.score(q, r) for q, r in pairs), "raw", self.name)


@dataclass(frozen=True)
class RankedList:
    question_id: str
    candidates: tuple[ScoredCandidate, ...]
    depth: int = DEFAULT_DEPTH

    def __post_init__(self):
        if self.depth < 1:
            raise ValidationError("depth must be a positive integer")
        if len(self.candidates) > self.depth:
            raise ValidationError("ranked list longer than its depth")

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    @property
    def review_ids(self) -> list[str]:
        return [c.review_id for c in self.candidates]

    @property
    def probabilities(self) -> list[float]:
        return [c.probability for c in self.candidates]

    @property
    def raw_scores(self) -> list[float]:
        return [c.raw_score for c in self.candidates]


def rank_reviews(question_id, candidate_ids: Iterable[str],
                 scores: Mapping | Callable[[str, str], ScoredCandidate],
                 depth: int = DEFAULT_DEPTH) -> RankedList:
    """Top ``depth`` candidates by probability, ties broken by review id."""
    if depth < 1:
        raise ValidationError("depth must be a positive integer")
    lookup = scores.__getitem__ if isinstance(scores, Mapping) else None
    scored = []
    for rid in candidate_ids:
        try:
            if lookup is not None:
                c = lookup((question_id, rid))
            else:
                c = scores(question_id, rid)
        except KeyError:
            raise DataError(f"no score for pair ({question_id!r}, {rid!r})") from None
        scored.append(c)
    scored.sort(key=lambda c: (-c.probability, c.review_id))
    return RankedList(question_id, tuple(scored[:depth]), depth)
