"""NDCG' for answerable and unanswerable questions.

A terminal document is appended to every returned list. Its gain is 1 for
a question with no relevant reviews, otherwise the share of relevance mass
the list retrieved. Returning nothing for an unanswerable question thus
scores 1, and every irrelevant review before the terminal lowers it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantError, ValidationError

DEFAULT_DEPTH = 10


def terminal_gain(returned_gains: Sequence[float], R: int) -> float:
    if R < 0:
        raise ValidationError("R must be non-negative")
    if R == 0:
        return 1.0
    return float(sum(returned_gains)) / R


def dcg(gains: Sequence[float]) -> float:
    """Linear-gain DCG with discount ``1 / log2(rank + 1)``."""
    return float(sum(g / math.log2(i + 2) for i, g in enumerate(gains)))


def ndcg_prime(returned_gains: Sequence[float], ideal_gains: Sequence[float], R: int | None = None,
               d_cap: int = DEFAULT_DEPTH) -> float:
    """NDCG' of one returned list.

    ``ideal_gains`` holds the effective relevance of every relevant review
    for the question; ``R`` defaults to its length.
    """
    if R is None:
        R = len(ideal_gains)
    returned = list(returned_gains)[:d_cap]
    d = len(returned)
    got = dcg(returned + [terminal_gain(returned, R)])
    ideal = sorted(ideal_gains, reverse=True)
    ideal_list = ideal + [terminal_gain(ideal, R)]
    ideal_list = (ideal_list + [0.0] * (d + 1))[: d + 1]
    best = dcg(ideal_list)
    if best <= 0.0:
        raise InvariantError(f"ideal DCG is {best} for R={R}, ideal={ideal!r}")
    return got / best


@dataclass(frozen=True)
class QuestionScore:
    question_id: str
    answerable: bool
    ndcg_prime: float


@dataclass(frozen=True)
class AggregateScore:
    n_a: float
    n_u: float
    n_au: float
    n_answerable: int = 0
    n_unanswerable: int = 0


class EmptyGroupError(ValidationError):
    """Aggregation needs both answerable and unanswerable questions."""


def aggregate(question_scores: Iterable[QuestionScore], allow_missing_group: bool = False) -> AggregateScore:
    """Group means and their geometric mean.

    With ``allow_missing_group`` a missing group takes the value of the
    other group, so ``n_au`` degrades to the mean of the questions present.
    """
    scores = list(question_scores)
    a = [s.ndcg_prime for s in scores if s.answerable]
    u = [s.ndcg_prime for s in scores if not s.answerable]
    return aggregate_means(a, u, allow_missing_group)


def aggregate_means(answerable: Sequence[float], unanswerable: Sequence[float],
                    allow_missing_group: bool = False) -> AggregateScore:
    na, nu = len(answerable), len(unanswerable)
    if not na or not nu:
        if not allow_missing_group or (not na and not nu):
            missing = "answerable" if not na else "unanswerable"
            raise EmptyGroupError(
                f"no {missing} questions to average; aggregate a set containing both groups"
            )
    n_a = math.fsum(answerable) / na if na else None
    n_u = math.fsum(unanswerable) / nu if nu else None
    if n_a is None:
        n_a = n_u
    if n_u is None:
        n_u = n_a
    return AggregateScore(n_a, n_u, math.sqrt(n_a * n_u), na, nu)


def geometric_mean(n_a: float, n_u: float) -> float:
    return math.sqrt(n_a * n_u)


def ideal_dcg_prefixes(ideal_gains: Sequence[float], R: int, d_cap: int) -> np.ndarray:
    """``out[m]`` is the ideal DCG over ``m + 1`` positions, ``m = 0..d_cap``."""
    ideal = sorted(ideal_gains, reverse=True)
    full = (ideal + [terminal_gain(ideal, R)] + [0.0] * (d_cap + 1))[: d_cap + 1]
    disc = 1.0 / np.log2(np.arange(2, d_cap + 3))
    return np.cumsum(np.asarray(full) * disc)


def ndcg_prime_masked(gains: np.ndarray, masks: np.ndarray, R: int, idcg: np.ndarray) -> np.ndarray:
    """NDCG' of many sub-lists of one candidate list at once.

    ``gains`` has shape ``(d,)``; ``masks`` has shape ``(..., d)`` and
    selects the retained candidates in order. ``idcg`` comes from
    :func:`ideal_dcg_prefixes`.
    """
    masks = np.asarray(masks, dtype=bool)
    gains = np.asarray(gains, dtype=float)
    pos = np.cumsum(masks, axis=-1)
    m = pos[..., -1] if masks.shape[-1] else np.zeros(masks.shape[:-1], dtype=int)
    disc = np.where(masks, 1.0 / np.log2(np.maximum(pos, 1) + 1.0), 0.0)
    got = (disc * gains).sum(axis=-1)
    if R == 0:
        rt = np.ones_like(got)
    else:
        rt = (masks * gains).sum(axis=-1) / R
    got = got + rt / np.log2(m + 2.0)
    return got / idcg[m]
