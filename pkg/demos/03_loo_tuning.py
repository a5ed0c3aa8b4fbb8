"""
Leave-one-out tuning on a synthetic corpus
==========================================

Each question is held out in turn.  The score threshold (THRS) or the
significance level (IMCP) is chosen on the remaining questions and then
applied to the held-out list.  IMCP calibrates inner folds on all but one
validation question, so no question ever calibrates its own filter.
"""

from pqa_reject import ScoreTable, apply_relevance_threshold, rank_reviews
from pqa_reject.synth import SynthConfig, generate_corpus
from pqa_reject.tuning import build_instances, loo_experiment

synth = generate_corpus(SynthConfig(n_questions=60), seed=1)
table = ScoreTable.from_scores(synth.scores, "probability", "synthetic")
corpus = synth.corpus
ranked = {q: rank_reviews(q, corpus.candidate_reviews(q), table, 10) for q in corpus.question_ids}

for tau in (2.0, 2.5):
    instances = build_instances(apply_relevance_threshold(corpus, tau), ranked, table)
    for method in ("vanilla", "thrs", "imcp"):
        agg = loo_experiment(instances, method).aggregate
        print(f"tau={tau} {method:8s} n_au={agg.n_au:.3f} n_a={agg.n_a:.3f} n_u={agg.n_u:.3f}")
