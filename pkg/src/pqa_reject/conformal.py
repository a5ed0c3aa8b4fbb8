"""Inductive Mondrian conformal rejection of ranked reviews.

A candidate review with positive-class probability ``f`` has nonconformity
``-f`` under the relevant label and ``-(1 - f)`` under the irrelevant one.
Each label's p-value is computed against calibration scores of that label
only::

    p(x, k) = (#{i in class k : alpha_i >= alpha(x, k)} + 1) / (n_k + 1)

A label enters the prediction region when its p-value exceeds the
significance level ``epsilon``. A review is accepted only when the region
is exactly ``{1}``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scorers import RankedList

RELEVANT = 1
IRRELEVANT = 0
LABELS = (IRRELEVANT, RELEVANT)


def _check_probability(p):
    p = np.asarray(p, dtype=float)
    if p.size and (np.isnan(p).any() or p.min() < 0.0 or p.max() > 1.0):
        raise ValidationError("probabilities must lie in [0, 1]")
    return p


def _check_label(label):
    if label not in LABELS or isinstance(label, bool):
        raise ValidationError(f"label must be 0 or 1, got {label!r}")


def nonconformity(probability, label):
    """Nonconformity of a candidate under ``label``; scalar or array in, same out."""
    _check_label(label)
    p = _check_probability(probability)
    out = -p if label == RELEVANT else -(1.0 - p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class CalibrationSet:
    """Per-class sorted nonconformity scores of labeled calibration pairs."""

    irrelevant: np.ndarray
    relevant: np.ndarray

    def __post_init__(self):
        for arr in (self.irrelevant, self.relevant):
            arr.setflags(write=False)

    def scores(self, label) -> np.ndarray:
        _check_label(label)
        return self.relevant if label == RELEVANT else self.irrelevant

    def n(self, label) -> int:
        return int(self.scores(label).size)

    @property
    def n_relevant(self) -> int:
        return int(self.relevant.size)

    @property
    def n_irrelevant(self) -> int:
        return int(self.irrelevant.size)

    def __repr__(self):
        return f"CalibrationSet(n_relevant={self.n_relevant}, n_irrelevant={self.n_irrelevant})"

    def count_at_least(self, alpha, label) -> np.ndarray:
        """Number of class-``label`` scores ``>= alpha`` for each entry of ``alpha``."""
        s = self.scores(label)
        return s.size - np.searchsorted(s, np.asarray(alpha, dtype=float), side="left")


def calibrate(probabilities, labels) -> CalibrationSet:
    """Build a calibration set from probabilities and binary ground-truth labels."""
    p = _check_probability(np.atleast_1d(np.asarray(probabilities, dtype=float)))
    y = np.atleast_1d(np.asarray(labels))
    if p.shape != y.shape:
        raise ValidationError("probabilities and labels must have the same length")
    if y.size and not np.isin(y, LABELS).all():
        raise ValidationError("labels must be 0 or 1")
    y = y.astype(int)
    rel = np.sort(nonconformity(p[y == RELEVANT], RELEVANT)) if y.size else np.empty(0)
    irr = np.sort(nonconformity(p[y == IRRELEVANT], IRRELEVANT)) if y.size else np.empty(0)
    return CalibrationSet(irrelevant=np.asarray(irr, dtype=float), relevant=np.asarray(rel, dtype=float))


def p_value(cal: CalibrationSet, alpha, label, pooled: bool = False):
    """Conformal p-value of nonconformity ``alpha`` under ``label``.

    ``pooled=True`` compares against the scores of both classes with
    denominator ``n + 1``, the plain (non-Mondrian) inductive predictor.
    It is provided for comparison only.
    """
    alpha = np.asarray(alpha, dtype=float)
    if pooled:
        count = cal.count_at_least(alpha, RELEVANT) + cal.count_at_least(alpha, IRRELEVANT)
        n = cal.n_relevant + cal.n_irrelevant
    else:
        count = cal.count_at_least(alpha, label)
        n = cal.n(label)
    p = (count + 1.0) / (n + 1.0)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class PValuePair:
    p_relevant: float
    p_irrelevant: float


def p_values(cal: CalibrationSet, probability, pooled: bool = False):
    """``(p_relevant, p_irrelevant)`` for one probability or an array of them."""
    p1 = p_value(cal, nonconformity(probability, RELEVANT), RELEVANT, pooled)
    p0 = p_value(cal, nonconformity(probability, IRRELEVANT), IRRELEVANT, pooled)
    if np.ndim(p1) == 0:
        return PValuePair(p1, p0)
    return p1, p0


@dataclass(frozen=True)
class PredictionRegion:
    labels: frozenset
    epsilon: float


def prediction_region(p_pair: PValuePair, epsilon: float) -> PredictionRegion:
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon {epsilon} outside [0, 1]")
    labels = set()
    if p_pair.p_relevant > epsilon:
        labels.add(RELEVANT)
    if p_pair.p_irrelevant > epsilon:
        labels.add(IRRELEVANT)
    return PredictionRegion(frozenset(labels), float(epsilon))


class Decision(enum.Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"


def accept(region: PredictionRegion) -> Decision:
    return Decision.ACCEPTED if region.labels == {RELEVANT} else Decision.REJECTED


def accept_mask(p1, p0, epsilon):
    """Vectorized :func:`accept` over p-value arrays."""
    return (np.asarray(p1) > epsilon) & (np.asarray(p0) <= epsilon)


def filter_ranked_list(ranked: RankedList, cal: CalibrationSet, epsilon: float,
                       pooled: bool = False) -> RankedList:
    """Drop every candidate whose prediction region is not ``{1}``.

    Survivors keep their order. An empty result means the question is
    judged unanswerable.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon {epsilon} outside [0, 1]")
    if not ranked.candidates:
        return ranked
    p1, p0 = p_values(cal, np.array(ranked.probabilities), pooled)
    keep = accept_mask(p1, p0, epsilon)
    kept = tuple(c for c, k in zip(ranked.candidates, keep) if k)
    return RankedList(ranked.question_id, kept, ranked.depth)
