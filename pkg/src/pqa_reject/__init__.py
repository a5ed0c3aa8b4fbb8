"""Conformal rejection of unreliable reviews for product question answering.

A relevance scorer ranks review sentences for a question; an inductive
Mondrian conformal predictor then keeps only reviews it is confident are
relevant, possibly none. Results are scored with NDCG', which rewards
returning nothing for unanswerable questions.
"""

from .conformal import (CalibrationSet, Decision, PredictionRegion, PValuePair, accept,
                        calibrate, filter_ranked_list, nonconformity, p_value, p_values,
                        prediction_region)
from .corpus import (Corpus, Question, RelevanceJudgment, ReviewSentence, ThresholdedCorpus,
                     apply_relevance_threshold, corpus_stats, load_corpus)
from .errors import (ConfigError, DataError, IntegrityError, InvariantError, ParseError,
                     PQARejectError, ValidationError)
from .metrics import AggregateScore, QuestionScore, aggregate, dcg, ndcg_prime, terminal_gain
from .scorers import (CollectionStatistics, LexicalScorer, RankedList, ScoredCandidate,
                      ScoreTable, lexical_score, load_external_scores, rank_reviews,
                      score_to_probability)
from .tuning import (FoldPlan, TunedParameter, build_fold_plan, build_instances,
                     evaluate_vanilla, loo_experiment, tune_epsilon, tune_score_threshold)

__version__ = "0.1.0"
