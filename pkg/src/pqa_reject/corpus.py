"""Questions, review sentences and graded relevance judgments.

Judgments carry the mean of annotator scores on a 0-3 scale. A relevance
threshold ``tau`` binarizes them: a review scoring below ``tau`` gets
effective relevance 0.0, and a question with no review at or above ``tau``
is unanswerable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from ._jsonl import read_records, require
from .errors import IntegrityError, ParseError, ValidationError

MAX_RELEVANCE = 3.0


@dataclass(frozen=True)
class Question:
    question_id: str
    product_id: str
    text: str
    category: str | None = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"question {self.question_id!r} has empty text")


@dataclass(frozen=True)
class ReviewSentence:
    review_id: str
    product_id: str
    text: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"review {self.review_id!r} has empty text")


@dataclass(frozen=True)
class RelevanceJudgment:
    question_id: str
    review_id: str
    mean_relevance: float
    raw_scores: tuple[int, ...] | None = None

    def __post_init__(self):
        rel = self.mean_relevance
        if not (isinstance(rel, (int, float)) and math.isfinite(rel)):
            raise ValidationError(f"mean_relevance must be a finite number, got {rel!r}")
        if not 0.0 <= rel <= MAX_RELEVANCE:
            raise ValidationError(f"mean_relevance {rel} outside [0, {MAX_RELEVANCE:g}]")
        if self.raw_scores is not None:
            if not self.raw_scores:
                raise ValidationError("raw_scores must be non-empty when given")
            for s in self.raw_scores:
                if s not in (0, 1, 2, 3) or isinstance(s, bool):
                    raise ValidationError(f"raw annotator score {s!r} not in {{0,1,2,3}}")
            mean = sum(self.raw_scores) / len(self.raw_scores)
            if abs(mean - rel) > 1e-9:
                raise ValidationError(
                    f"mean_relevance {rel} does not equal mean of raw_scores ({mean})"
                )


class Corpus:
    """Immutable collection of questions, reviews and judgments.

    Every judgment is checked to reference a known question and review.
    """

    def __init__(self, questions, reviews, judgments):
        self.questions: Mapping[str, Question] = _index(questions, "question_id")
        self.reviews: Mapping[str, ReviewSentence] = _index(reviews, "review_id")
        table = {}
        for j in judgments:
            if j.question_id not in self.questions:
                raise IntegrityError(f"judgment references unknown question_id {j.question_id!r}")
            if j.review_id not in self.reviews:
                raise IntegrityError(f"judgment references unknown review_id {j.review_id!r}")
            key = (j.question_id, j.review_id)
            if key in table:
                raise IntegrityError(f"duplicate judgment for {key}")
            table[key] = j
        self.judgments: Mapping[tuple[str, str], RelevanceJudgment] = MappingProxyType(table)

        by_question: dict[str, list[str]] = {qid: [] for qid in self.questions}
        for qid, rid in table:
            by_question[qid].append(rid)
        self._judged = MappingProxyType(
            {qid: tuple(sorted(rids)) for qid, rids in by_question.items()}
        )

        by_product: dict[str, list[str]] = {}
        for rid, r in self.reviews.items():
            by_product.setdefault(r.product_id, []).append(rid)
        self._by_product = MappingProxyType(
            {pid: tuple(sorted(rids)) for pid, rids in by_product.items()}
        )

    def __repr__(self):
        return (
            f"Corpus(questions={len(self.questions)}, reviews={len(self.reviews)}, "
            f"judgments={len(self.judgments)})"
        )

    @property
    def question_ids(self) -> list[str]:
        return sorted(self.questions)

    def judged_reviews(self, question_id) -> tuple[str, ...]:
        return self._judged[question_id]

    def product_reviews(self, product_id) -> tuple[str, ...]:
        return self._by_product.get(product_id, ())

    def candidate_reviews(self, question_id) -> tuple[str, ...]:
        """Review ids of the question's product, sorted."""
        return self.product_reviews(self.questions[question_id].product_id)


def _index(items, key):
    table = {}
    for item in items:
        k = getattr(item, key)
        if k in table:
            raise IntegrityError(f"duplicate {key} {k!r}")
        table[k] = item
    return MappingProxyType(table)


def _load(path, build):
    out = []
    for line_no, rec in read_records(path):
        try:
            out.append(build(rec, path, line_no))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{line_no}: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(path, line_no, str(exc)) from None
    return out


def _question(rec, path, line_no):
    return Question(
        question_id=str(require(rec, "question_id", path, line_no)),
        product_id=str(require(rec, "product_id", path, line_no)),
        text=require(rec, "text", path, line_no),
        category=rec.get("category"),
    )


def _review(rec, path, line_no):
    return ReviewSentence(
        review_id=str(require(rec, "review_id", path, line_no)),
        product_id=str(require(rec, "product_id", path, line_no)),
        text=require(rec, "text", path, line_no),
    )


def _judgment(rec, path, line_no):
    rel = require(rec, "mean_relevance", path, line_no)
    if isinstance(rel, bool) or not isinstance(rel, (int, float)):
        raise ParseError(path, line_no, f"mean_relevance must be a number, got {rel!r}")
    raw = rec.get("raw_scores")
    if raw is not None:
        if not isinstance(raw, list):
            raise ParseError(path, line_no, "raw_scores must be a list")
        raw = tuple(raw)
    return RelevanceJudgment(
        question_id=str(require(rec, "question_id", path, line_no)),
        review_id=str(require(rec, "review_id", path, line_no)),
        mean_relevance=float(rel),
        raw_scores=raw,
    )


def load_corpus(question_path, review_path, judgment_path) -> Corpus:
    """Read the three JSON-lines files and cross-check identifiers."""
    questions = _load(question_path, _question)
    reviews = _load(review_path, _review)
    judgments = _load(judgment_path, _judgment)
    return Corpus(questions, reviews, judgments)


@dataclass(frozen=True)
class ThresholdedCorpus:
    """A corpus viewed under relevance threshold ``tau``.

    ``effective_relevance`` covers every judged pair. Unjudged pairs are
    irrelevant; use :meth:`relevance` to look them up with that default.
    """

    corpus: Corpus
    tau: float
    effective_relevance: Mapping[tuple[str, str], float]
    answerable: Mapping[str, bool]
    R: Mapping[str, int]
    _ideal: Mapping[str, tuple[float, ...]] = field(repr=False, compare=False)

    def relevance(self, question_id, review_id) -> float:
        return self.effective_relevance.get((question_id, review_id), 0.0)

    def ideal_gains(self, question_id) -> tuple[float, ...]:
        """Effective relevance of every relevant review, descending."""
        return self._ideal[question_id]

    @property
    def question_ids(self) -> list[str]:
        return self.corpus.question_ids


def apply_relevance_threshold(corpus: Corpus, tau: float) -> ThresholdedCorpus:
    if not 0.0 <= tau <= MAX_RELEVANCE:
        raise ValidationError(f"relevance threshold {tau} outside [0, {MAX_RELEVANCE:g}]")
    eff = {}
    relevant: dict[str, list[float]] = {qid: [] for qid in corpus.questions}
    for key, j in corpus.judgments.items():
        # a score exactly at tau counts as relevant
        value = j.mean_relevance if j.mean_relevance >= tau else 0.0
        eff[key] = value
        if value > 0.0:
            relevant[key[0]].append(value)
    ideal = {qid: tuple(sorted(v, reverse=True)) for qid, v in relevant.items()}
    return ThresholdedCorpus(
        corpus=corpus,
        tau=float(tau),
        effective_relevance=MappingProxyType(eff),
        answerable=MappingProxyType({qid: bool(v) for qid, v in ideal.items()}),
        R=MappingProxyType({qid: len(v) for qid, v in ideal.items()}),
        _ideal=MappingProxyType(ideal),
    )


@dataclass(frozen=True)
class StatsRow:
    tau: float
    n_relevant: int
    n_answerable: int
    pct_answerable: float


def corpus_stats(tc: ThresholdedCorpus) -> StatsRow:
    n_questions = len(tc.answerable)
    n_answerable = sum(tc.answerable.values())
    pct = 100.0 * n_answerable / n_questions if n_questions else 0.0
    return StatsRow(tc.tau, sum(tc.R.values()), n_answerable, pct)
