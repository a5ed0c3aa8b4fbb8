"""Experiment configuration, the evaluation pipeline and tabular reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import tuning
from .corpus import Corpus, apply_relevance_threshold, corpus_stats, load_corpus
from .errors import ConfigError, DataError, IntegrityError, InvariantError
from .metrics import EmptyGroupError
from .scorers import (DEFAULT_DEPTH, SCORE_KINDS, LexicalScorer, ScoreTable,
                      load_external_scores, rank_reviews)

DEFAULT_THRESHOLDS = (2.00, 2.25, 2.50, 2.75)
STATS_THRESHOLDS = (2.00, 2.25, 2.50, 2.75, 3.00)
REPORT_COLUMNS = ("relevance_threshold", "scorer", "method", "n_au", "n_a", "n_u")


@dataclass
class ExperimentConfig:
    questions: str | None = None
    reviews: str | None = None
    judgments: str | None = None
    scores: list[str] = field(default_factory=list)
    score_kind: str | None = None
    lexical: bool = False
    thresholds: list[float] = field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    methods: list[str] = field(default_factory=lambda: list(tuning.METHODS))
    depth: int = DEFAULT_DEPTH
    epsilon_step: float = 0.01
    seed: int = 0

    def validate(self):
        """Raise :class:`ConfigError` listing every problem found."""
        problems = []
        for name in ("questions", "reviews", "judgments"):
            if not getattr(self, name):
                problems.append(f"--{name} is required")
        if not self.thresholds:
            problems.append("at least one relevance threshold is required")
        for t in self.thresholds:
            if not 0.0 <= t <= 3.0:
                problems.append(f"relevance threshold {t} outside [0, 3]")
        if not self.methods:
            problems.append("methods must be non-empty")
        for m in self.methods:
            if m not in tuning.METHODS:
                problems.append(f"unknown method {m!r} (choose from {', '.join(tuning.METHODS)})")
        if self.depth < 1:
            problems.append(f"depth must be a positive integer, got {self.depth}")
        if not 0.0 < self.epsilon_step <= 1.0:
            problems.append(f"epsilon step must be in (0, 1], got {self.epsilon_step}")
        if self.score_kind is not None and self.score_kind not in SCORE_KINDS:
            problems.append(f"score kind must be one of {SCORE_KINDS}")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if problems:
            raise ConfigError(problems)

    def input_paths(self) -> list[str]:
        return [p for p in (self.questions, self.reviews, self.judgments, *self.scores) if p]


def check_inputs_exist(paths):
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        raise DataError("missing input files: " + ", ".join(missing))


@dataclass(frozen=True)
class ReportRow:
    relevance_threshold: float
    scorer: str
    method: str
    n_au: float
    n_a: float
    n_u: float


@dataclass(frozen=True)
class ScorerRun:
    """A scorer's ranked lists plus the scores of every judged pair it covers."""

    name: str
    ranked: dict
    table: ScoreTable


def lexical_run(corpus: Corpus, depth: int) -> ScorerRun:
    scorer = LexicalScorer(corpus)
    pairs = set()
    for qid in corpus.question_ids:
        pairs.update((qid, rid) for rid in corpus.candidate_reviews(qid))
        pairs.update((qid, rid) for rid in corpus.judged_reviews(qid))
    table = scorer.table(sorted(pairs))
    ranked = {qid: rank_reviews(qid, corpus.candidate_reviews(qid), table, depth)
              for qid in corpus.question_ids}
    return ScorerRun(scorer.name, ranked, table)


def external_run(corpus: Corpus, table: ScoreTable, depth: int) -> ScorerRun:
    for qid, rid in table:
        if qid not in corpus.questions:
            raise IntegrityError(f"score file {table.name!r} references unknown question_id {qid!r}")
        if rid not in corpus.reviews:
            raise IntegrityError(f"score file {table.name!r} references unknown review_id {rid!r}")
    ranked = {qid: rank_reviews(qid, table.reviews_for(qid), table, depth)
              for qid in corpus.question_ids}
    return ScorerRun(table.name, ranked, table)


def audit_order(run: ScorerRun, result: tuning.ExperimentResult):
    """Every retained list must be a subsequence of the scorer's ranked list."""
    for fold in result.folds:
        ranked = iter(run.ranked[fold.test_id].review_ids)
        if not all(rid in ranked for rid in fold.retained):
            raise InvariantError(
                f"{result.method} reordered the list of question {fold.test_id!r}"
            )


def run_experiments(corpus: Corpus, runs: Sequence[ScorerRun], thresholds, methods,
                    epsilon_step: float = 0.01) -> list[ReportRow]:
    """One row per (threshold, scorer, method), in that nesting order."""
    eps = tuning.epsilon_grid(epsilon_step)
    rows = []
    for tau in thresholds:
        tc = apply_relevance_threshold(corpus, tau)
        for run in runs:
            instances = tuning.build_instances(tc, run.ranked, run.table)
            for method in methods:
                try:
                    result = tuning.loo_experiment(instances, method, eps)
                except EmptyGroupError as exc:
                    raise DataError(f"relevance threshold {tau:.2f}: {exc}") from None
                audit_order(run, result)
                agg = result.aggregate
                row = ReportRow(float(tau), run.name, method, agg.n_au, agg.n_a, agg.n_u)
                if abs(row.n_au - math.sqrt(row.n_a * row.n_u)) > 1e-9:
                    raise InvariantError(f"inconsistent aggregate in {row}")
                rows.append(row)
    return rows


def evaluate(config: ExperimentConfig) -> list[ReportRow]:
    config.validate()
    check_inputs_exist(config.input_paths())
    corpus = load_corpus(config.questions, config.reviews, config.judgments)
    runs = []
    if config.lexical or not config.scores:
        runs.append(lexical_run(corpus, config.depth))
    for path in config.scores:
        table = load_external_scores(path, config.score_kind)
        runs.append(external_run(corpus, table, config.depth))
    names = [r.name for r in runs]
    if len(set(names)) != len(names):
        raise ConfigError(f"scorer names must be distinct, got {names}")
    return run_experiments(corpus, runs, config.thresholds, config.methods, config.epsilon_step)


def _fmt(value, full_precision):
    return repr(float(value)) if full_precision else f"{value:.3f}"


def format_report(rows: Sequence[ReportRow], full_precision: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow([
            f"{r.relevance_threshold:.2f}", r.scorer, r.method,
            _fmt(r.n_au, full_precision), _fmt(r.n_a, full_precision), _fmt(r.n_u, full_precision),
        ])
    return buf.getvalue()


def format_stats(corpus: Corpus, thresholds=STATS_THRESHOLDS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("relevance_threshold", "n_relevant", "n_answerable", "pct_answerable"))
    for tau in thresholds:
        s = corpus_stats(apply_relevance_threshold(corpus, tau))
        writer.writerow((f"{tau:.2f}", s.n_relevant, s.n_answerable, f"{s.pct_answerable:.1f}"))
    return buf.getvalue()
