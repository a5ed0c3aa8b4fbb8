"""Leave-one-out evaluation of vanilla, score-threshold and conformal rejection.

Every method is judged by NDCG' aggregated into answerable/unanswerable
group means and their geometric mean. The score-threshold baseline (THRS)
truncates each list at a raw-score cutoff tuned on the other questions.
The conformal method (IMCP) tunes a significance level with a nested
leave-one-out: each inner validation question is scored against
calibration pairs from the remaining validation questions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import conformal, metrics
from .corpus import ThresholdedCorpus
from .errors import DataError, ValidationError
from .metrics import AggregateScore, QuestionScore
from .scorers import RankedList, ScoredCandidate

METHODS = ("vanilla", "thrs", "imcp")
TIE_TOL = 1e-12


def epsilon_grid(step: float = 0.01) -> np.ndarray:
    if not 0.0 < step <= 1.0:
        raise ValidationError(f"epsilon step {step} must be in (0, 1]")
    n = int(round(1.0 / step))
    grid = np.round(np.arange(n + 1) * step, 12)
    grid = grid[grid <= 1.0]
    if grid[-1] < 1.0:
        grid = np.append(grid, 1.0)
    return grid


@dataclass(frozen=True, eq=False)
class QuestionInstance:
    """Everything the tuners need to know about one question."""

    question_id: str
    answerable: bool
    R: int
    ideal_gains: tuple[float, ...]
    ranked: RankedList
    gains: np.ndarray
    probabilities: np.ndarray
    raw_scores: np.ndarray
    cal_probabilities: np.ndarray
    cal_labels: np.ndarray
    idcg: np.ndarray = field(repr=False)

    def ndcg(self, keep=None) -> float:
        """NDCG' of the ranked list, restricted to ``keep`` when given."""
        gains = self.gains if keep is None else self.gains[np.asarray(keep, dtype=bool)]
        return metrics.ndcg_prime(list(gains), self.ideal_gains, self.R, self.ranked.depth)

    def score(self, keep=None) -> QuestionScore:
        return QuestionScore(self.question_id, self.answerable, self.ndcg(keep))

    @cached_property
    def threshold_levels(self):
        """Distinct raw scores ascending, and NDCG' when keeping scores >= each.

        The value array has one extra trailing entry for keeping nothing.
        """
        levels = np.unique(self.raw_scores)
        masks = self.raw_scores[None, :] >= np.append(levels, np.inf)[:, None]
        return levels, metrics.ndcg_prime_masked(self.gains, masks, self.R, self.idcg)


def build_instance(tc: ThresholdedCorpus, ranked: RankedList,
                   calibration: Sequence[ScoredCandidate] = ()) -> QuestionInstance:
    """Bundle a ranked list with its ground truth.

    ``calibration`` holds the scored judged pairs of this question; when it
    serves as calibration data their labels follow ``tc``.
    """
    qid = ranked.question_id
    ideal = tc.ideal_gains(qid)
    R = tc.R[qid]
    cal = [c for c in calibration if (qid, c.review_id) in tc.effective_relevance]
    return QuestionInstance(
        question_id=qid,
        answerable=tc.answerable[qid],
        R=R,
        ideal_gains=ideal,
        ranked=ranked,
        gains=np.array([tc.relevance(qid, c.review_id) for c in ranked], dtype=float),
        probabilities=np.array(ranked.probabilities, dtype=float),
        raw_scores=np.array(ranked.raw_scores, dtype=float),
        cal_probabilities=np.array([c.probability for c in cal], dtype=float),
        cal_labels=np.array([int(tc.relevance(qid, c.review_id) > 0.0) for c in cal], dtype=int),
        idcg=metrics.ideal_dcg_prefixes(ideal, R, ranked.depth),
    )


def build_instances(tc: ThresholdedCorpus, ranked_lists: Mapping[str, RankedList],
                    scores: Mapping[tuple[str, str], ScoredCandidate] | None = None,
                    question_ids: Iterable[str] | None = None) -> list[QuestionInstance]:
    """Instances for ``question_ids`` (default: all, sorted).

    Calibration pairs are the judged pairs found in ``scores``; judged
    pairs without a score are left out.
    """
    qids = sorted(question_ids) if question_ids is not None else tc.question_ids
    out = []
    for qid in qids:
        if qid not in ranked_lists:
            raise DataError(f"no ranked list for question {qid!r}")
        cal = []
        if scores is not None:
            for rid in tc.corpus.judged_reviews(qid):
                c = scores.get((qid, rid))
                if c is not None:
                    cal.append(c)
        out.append(build_instance(tc, ranked_lists[qid], cal))
    return out


def evaluate_vanilla(questions: Iterable[str], ranked_lists: Mapping[str, RankedList],
                     tc: ThresholdedCorpus, d_cap: int = metrics.DEFAULT_DEPTH,
                     allow_missing_group: bool = False) -> AggregateScore:
    """Score the top ``d_cap`` of every list without any rejection."""
    scores = []
    for qid in sorted(questions):
        if qid not in ranked_lists:
            raise DataError(f"no ranked list for question {qid!r}")
        gains = [tc.relevance(qid, rid) for rid in ranked_lists[qid].review_ids[:d_cap]]
        value = metrics.ndcg_prime(gains, tc.ideal_gains(qid), tc.R[qid], d_cap)
        scores.append(QuestionScore(qid, tc.answerable[qid], value))
    return metrics.aggregate(scores, allow_missing_group)


@dataclass(frozen=True)
class FoldPlan:
    """Leave-one-out folds over sorted question ids."""

    question_ids: tuple[str, ...]
    outer: tuple[tuple[str, tuple[str, ...]], ...]
    nested: bool = False

    def inner(self, test_id) -> list[tuple[str, tuple[str, ...]]]:
        """``(inner validation question, calibration questions)`` pairs for one outer fold."""
        if not self.nested:
            raise ValidationError("fold plan has no inner folds")
        validation = dict(self.outer)[test_id]
        return [(v, tuple(q for q in validation if q != v)) for v in validation]


def build_fold_plan(question_ids: Iterable[str], nested: bool = False) -> FoldPlan:
    qids = tuple(sorted(question_ids))
    if len(set(qids)) != len(qids):
        raise ValidationError("question ids must be unique")
    outer = tuple((t, tuple(q for q in qids if q != t)) for t in qids)
    return FoldPlan(qids, outer, nested)


@dataclass(frozen=True)
class TunedParameter:
    kind: str
    value: float
    objective: float


def _group_objective(instances, values):
    """Geometric mean of group means for each column of ``values`` (n_questions, G)."""
    values = np.asarray(values, dtype=float)
    answerable = np.array([q.answerable for q in instances], dtype=bool)
    if not answerable.size:
        raise ValidationError("cannot tune on an empty validation set")
    n_a = values[answerable].mean(axis=0) if answerable.any() else None
    n_u = values[~answerable].mean(axis=0) if (~answerable).any() else None
    # a missing group degrades the objective to the mean of the other one
    if n_a is None:
        n_a = n_u
    if n_u is None:
        n_u = n_a
    return np.sqrt(n_a * n_u)


def _select(kind, grid, objective):
    best = objective.max()
    idx = int(np.flatnonzero(objective >= best - TIE_TOL)[0])
    return TunedParameter(kind, float(grid[idx]), float(objective[idx]))


def threshold_grid(instances: Sequence[QuestionInstance]) -> np.ndarray:
    """Midpoints between distinct observed raw scores plus one sentinel on each side."""
    observed = [q.raw_scores for q in instances if q.raw_scores.size]
    if not observed:
        return np.array([0.0])
    u = np.unique(np.concatenate(observed))
    mids = (u[:-1] + u[1:]) / 2.0
    return np.concatenate(([u[0] - 1.0], mids, [u[-1] + 1.0]))


def threshold_objective(instances, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    rows = []
    for q in instances:
        levels, values = q.threshold_levels
        rows.append(values[np.searchsorted(levels, grid, side="left")])
    return _group_objective(instances, rows)


def tune_score_threshold(instances: Sequence[QuestionInstance], grid=None) -> TunedParameter:
    """Raw-score cutoff maximizing validation N_{A+U}; ties go to the lowest cutoff."""
    grid = threshold_grid(instances) if grid is None else np.sort(np.asarray(grid, dtype=float))
    return _select("score_threshold", grid, threshold_objective(instances, grid))


def apply_score_threshold(q: QuestionInstance, threshold: float) -> np.ndarray:
    return q.raw_scores >= threshold


class CalibrationIndex:
    """Per-question calibration counts for fast leave-questions-out p-values.

    For every pair of questions ``(i, j)`` it stores how many of question
    ``i``'s calibration scores are at least each of question ``j``'s
    candidate nonconformities. The p-values of ``j`` against any subset of
    questions then follow by subtraction, with the exact integers that
    :func:`conformal.p_value` would count.
    """

    def __init__(self, instances: Sequence[QuestionInstance]):
        self.instances = list(instances)
        self.position = {q.question_id: i for i, q in enumerate(self.instances)}
        sizes = [q.probabilities.size for q in self.instances]
        self.offsets = np.concatenate(([0], np.cumsum(sizes))).astype(int)
        probs = (np.concatenate([q.probabilities for q in self.instances])
                 if self.offsets[-1] else np.empty(0))
        self._counts = {}
        self._n = {}
        for label in conformal.LABELS:
            alpha = conformal.nonconformity(probs, label)
            counts = np.zeros((len(self.instances), probs.size), dtype=np.int64)
            n = np.zeros(len(self.instances), dtype=np.int64)
            for i, q in enumerate(self.instances):
                cal = conformal.calibrate(q.cal_probabilities, q.cal_labels)
                counts[i] = cal.count_at_least(alpha, label)
                n[i] = cal.n(label)
            self._counts[label] = counts
            self._n[label] = n
        self._total = {k: v.sum(axis=0) for k, v in self._counts.items()}
        self._n_total = {k: int(v.sum()) for k, v in self._n.items()}

    def p_values(self, question_id, calibration_ids: Iterable[str] | None = None,
                 exclude: Iterable[str] = ()):
        """``(p1, p0)`` for a question's candidates.

        Calibration uses ``calibration_ids``, or all indexed questions
        minus ``exclude``, never the question itself.
        """
        j = self.position[question_id]
        sl = slice(self.offsets[j], self.offsets[j + 1])
        if calibration_ids is None:
            drop = {self.position[q] for q in exclude} | {j}
            drop_idx = np.array(sorted(drop), dtype=int)
        else:
            keep = {self.position[q] for q in calibration_ids} - {j}
            drop_idx = np.array(sorted(set(range(len(self.instances))) - keep), dtype=int)
        out = []
        for label in (conformal.RELEVANT, conformal.IRRELEVANT):
            count = self._total[label][sl] - self._counts[label][drop_idx, sl].sum(axis=0)
            n = self._n_total[label] - int(self._n[label][drop_idx].sum())
            out.append((count + 1.0) / (n + 1.0))
        return out[0], out[1]


def epsilon_objective(instances, eps_grid, index: CalibrationIndex | None = None,
                      exclude: Iterable[str] = ()) -> np.ndarray:
    """Validation N_{A+U} per epsilon, each instance calibrated on the others.

    Questions in ``exclude`` never contribute calibration data.
    """
    eps = np.asarray(eps_grid, dtype=float)
    if index is None:
        index = CalibrationIndex(instances)
    outside = set(exclude) | (set(index.position) - {q.question_id for q in instances})
    rows = []
    for q in instances:
        p1, p0 = index.p_values(q.question_id, exclude=outside)
        masks = conformal.accept_mask(p1[None, :], p0[None, :], eps[:, None])
        rows.append(metrics.ndcg_prime_masked(q.gains, masks, q.R, q.idcg))
    return _group_objective(instances, rows)


def tune_epsilon(instances: Sequence[QuestionInstance], eps_grid=None,
                 index: CalibrationIndex | None = None) -> TunedParameter:
    """Significance level maximizing inner leave-one-out N_{A+U}; ties go to the smallest."""
    if len(instances) < 3:
        raise ValidationError("epsilon tuning needs at least 3 validation questions")
    eps = epsilon_grid() if eps_grid is None else np.sort(np.asarray(eps_grid, dtype=float))
    return _select("epsilon", eps, epsilon_objective(instances, eps, index))


@dataclass(frozen=True)
class FoldResult:
    test_id: str
    tuned: TunedParameter | None
    score: QuestionScore
    retained: tuple[str, ...]


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    aggregate: AggregateScore
    folds: tuple[FoldResult, ...]

    @property
    def question_scores(self) -> list[QuestionScore]:
        return [f.score for f in self.folds]


def loo_experiment(instances: Sequence[QuestionInstance], method: str, eps_grid=None,
                   allow_missing_group: bool = False) -> ExperimentResult:
    """Leave-one-out test performance of ``method`` over ``instances``."""
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    by_id = {q.question_id: q for q in instances}
    if len(by_id) != len(instances):
        raise ValidationError("duplicate question ids among instances")
    plan = build_fold_plan(by_id, nested=(method == "imcp"))
    if method == "imcp":
        eps = epsilon_grid() if eps_grid is None else np.sort(np.asarray(eps_grid, dtype=float))
        index = CalibrationIndex([by_id[q] for q in plan.question_ids])
    folds = []
    for test_id, validation in plan.outer:
        test = by_id[test_id]
        val = [by_id[q] for q in validation]
        tuned = None
        try:
            if method == "vanilla":
                keep = np.ones(test.gains.size, dtype=bool)
            elif method == "thrs":
                tuned = tune_score_threshold(val)
                keep = apply_score_threshold(test, tuned.value)
            else:
                tuned = _select("epsilon", eps, epsilon_objective(val, eps, index, exclude=[test_id]))
                p1, p0 = index.p_values(test_id, calibration_ids=validation)
                keep = conformal.accept_mask(p1, p0, tuned.value)
        except ValidationError as exc:
            raise type(exc)(f"fold with test question {test_id!r}: {exc}") from None
        retained = tuple(rid for rid, k in zip(test.ranked.review_ids, keep) if k)
        folds.append(FoldResult(test_id, tuned, test.score(keep), retained))
    agg = metrics.aggregate([f.score for f in folds], allow_missing_group)
    return ExperimentResult(method, agg, tuple(folds))
