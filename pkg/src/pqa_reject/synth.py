"""Seeded synthetic corpora and a Monte Carlo check of conformal validity.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``; the
algorithm name is written into generated score files so fixtures can be
regenerated elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import conformal
from ._jsonl import write_records
from .corpus import Corpus, Question, RelevanceJudgment, ReviewSentence
from .errors import ConfigError

RNG_ALGORITHM = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SynthConfig:
    """Shape of a synthetic corpus.

    Each question is answerable with probability ``answerable_rate``. In
    an answerable question each review is relevant with probability
    ``relevant_rate`` (at least one is forced relevant). Model
    probabilities are drawn from ``Beta(*relevant_beta)`` for relevant
    reviews and ``Beta(*irrelevant_beta)`` otherwise.
    """

    n_questions: int = 40
    reviews_per_question: int = 20
    answerable_rate: float = 0.6
    relevant_rate: float = 0.25
    relevant_beta: tuple[float, float] = (5.0, 2.0)
    irrelevant_beta: tuple[float, float] = (2.0, 5.0)

    def validate(self):
        problems = []
        if self.n_questions < 0:
            problems.append("n_questions must be >= 0")
        if self.reviews_per_question < 1:
            problems.append("reviews_per_question must be >= 1")
        for name in ("answerable_rate", "relevant_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name} must lie in [0, 1], got {v}")
        for name in ("relevant_beta", "irrelevant_beta"):
            a, b = getattr(self, name)
            if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
                problems.append(f"{name} parameters must be positive and finite, got {(a, b)}")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class SynthCorpus:
    corpus: Corpus
    scores: dict


def generate_corpus(config: SynthConfig = SynthConfig(), seed: int = 0) -> SynthCorpus:
    """Draw a corpus, its judgments and model probabilities from ``seed``.

    Relevant reviews get three annotator scores from {2, 3}; irrelevant
    ones from {0, 1}.
    """
    config.validate()
    rng = make_rng(seed)
    questions, reviews, judgments = [], [], []
    scores = {}
    width = max(4, len(str(config.n_questions)))
    rwidth = max(2, len(str(config.reviews_per_question)))
    for i in range(config.n_questions):
        qid = f"q{i:0{width}d}"
        pid = f"p{i:0{width}d}"
        questions.append(Question(qid, pid, f"synthetic question {i}", "synthetic"))
        answerable = rng.random() < config.answerable_rate
        relevant = np.zeros(config.reviews_per_question, dtype=bool)
        if answerable:
            relevant = rng.random(config.reviews_per_question) < config.relevant_rate
            if not relevant.any():
                relevant[rng.integers(config.reviews_per_question)] = True
        for j, rel in enumerate(relevant):
            rid = f"r{i:0{width}d}-{j:0{rwidth}d}"
            reviews.append(ReviewSentence(rid, pid, f"synthetic review {j} for question {i}"))
            raw = rng.integers(2, 4, size=3) if rel else rng.integers(0, 2, size=3)
            raw = tuple(int(x) for x in raw)
            judgments.append(RelevanceJudgment(qid, rid, sum(raw) / 3.0, raw))
            a, b = config.relevant_beta if rel else config.irrelevant_beta
            scores[(qid, rid)] = float(rng.beta(a, b))
    return SynthCorpus(Corpus(questions, reviews, judgments), scores)


def write_corpus(synth: SynthCorpus, out_dir, seed=None) -> dict:
    """Write ``questions/reviews/judgments/scores.jsonl`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    c = synth.corpus
    paths = {k: out / f"{k}.jsonl" for k in ("questions", "reviews", "judgments", "scores")}
    write_records(paths["questions"], [
        {"question_id": q.question_id, "product_id": q.product_id, "text": q.text,
         "category": q.category}
        for q in (c.questions[k] for k in sorted(c.questions))
    ])
    write_records(paths["reviews"], [
        {"review_id": r.review_id, "product_id": r.product_id, "text": r.text}
        for r in (c.reviews[k] for k in sorted(c.reviews))
    ])
    write_records(paths["judgments"], [
        {"question_id": j.question_id, "review_id": j.review_id,
         "mean_relevance": j.mean_relevance, "raw_scores": list(j.raw_scores)}
        for _, j in sorted(c.judgments.items())
    ])
    header = {"score_kind": "probability", "name": "synthetic", "rng": RNG_ALGORITHM}
    if seed is not None:
        header["seed"] = seed
    write_records(paths["scores"], [header] + [
        {"question_id": q, "review_id": r, "score": s} for (q, r), s in sorted(synth.scores.items())
    ])
    return paths


def exchangeable_pairs(rng, n, prevalence=0.3, relevant_beta=(5.0, 2.0),
                       irrelevant_beta=(2.0, 5.0), shift=0.0):
    """``n`` i.i.d. (probability, label) pairs.

    ``shift`` moves every probability toward the wrong class, which breaks
    exchangeability with unshifted draws.
    """
    labels = (rng.random(n) < prevalence).astype(int)
    probs = np.where(
        labels == 1,
        rng.beta(*relevant_beta, size=n),
        rng.beta(*irrelevant_beta, size=n),
    )
    if shift:
        probs = np.clip(probs + np.where(labels == 1, -shift, shift), 0.0, 1.0)
    return probs, labels


@dataclass(frozen=True)
class ValidityRow:
    epsilon: float
    miscoverage: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.miscoverage <= self.bound


def coverage_bound(epsilon: float, n: int) -> float:
    return epsilon + 3.0 * math.sqrt(epsilon * (1.0 - epsilon) / n)


def true_label_p_values(seed: int, n_test: int = 10_000, n_calibration: int = 100_000,
                        shift: float = 0.0, **dist):
    """p-values of the true label for ``n_test`` fresh pairs."""
    rng = make_rng(seed)
    cal_p, cal_y = exchangeable_pairs(rng, n_calibration, **dist)
    test_p, test_y = exchangeable_pairs(rng, n_test, shift=shift, **dist)
    cal = conformal.calibrate(cal_p, cal_y)
    p1, p0 = conformal.p_values(cal, test_p)
    return np.where(test_y == 1, p1, p0)


def validity_table(seed: int, n_test: int = 10_000, epsilons=(0.05, 0.1, 0.2, 0.3),
                   n_calibration: int = 100_000, shift: float = 0.0, **dist) -> list[ValidityRow]:
    """Empirical miscoverage of the true label at each significance level."""
    problems = []
    if n_test < 1000:
        problems.append(f"N must be >= 1000, got {n_test}")
    if n_calibration < 1:
        problems.append("calibration size must be positive")
    bad = [e for e in epsilons if not 0.0 <= e <= 1.0]
    if bad:
        problems.append(f"epsilons outside [0, 1]: {bad}")
    if problems:
        raise ConfigError(problems)
    p_true = true_label_p_values(seed, n_test, n_calibration, shift, **dist)
    return [ValidityRow(float(e), float(np.mean(p_true <= e)), coverage_bound(e, n_test))
            for e in epsilons]
