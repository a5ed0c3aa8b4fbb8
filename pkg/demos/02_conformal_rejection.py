"""
Rejecting reviews with a Mondrian conformal predictor
=====================================================

Calibration pairs are split by label.  A candidate review keeps its place
in the list only when the prediction region at level epsilon is exactly
{relevant}.
"""

import numpy as np

from pqa_reject import calibrate, filter_ranked_list, p_values, prediction_region
from pqa_reject.conformal import PValuePair, accept
from pqa_reject.scorers import RankedList, ScoredCandidate

# one p-value pair, three significance levels
pair = PValuePair(0.65, 0.45)
for eps in (0.05, 0.45, 0.75):
    region = prediction_region(pair, eps)
    print(f"eps={eps:.2f} region={sorted(region.labels)} -> {accept(region).value}")

# calibrate on labeled probabilities from some scorer
rng = np.random.default_rng(0)
labels = rng.random(2000) < 0.3
probs = np.where(labels, rng.beta(5, 2, 2000), rng.beta(2, 5, 2000))
cal = calibrate(probs, labels.astype(int))

# a ranked list of ten candidates for a new question
scores = np.sort(rng.beta(2, 4, 10))[::-1]
ranked = RankedList("q", tuple(ScoredCandidate("q", f"r{i}", s, s) for i, s in enumerate(scores)), 10)
p1, p0 = p_values(cal, scores)
for c, a, b in zip(ranked, p1, p0):
    print(f"{c.review_id}: prob={c.probability:.3f} p_rel={a:.3f} p_irr={b:.3f}")

for eps in (0.1, 0.3, 0.5):
    print(f"eps={eps}: kept {filter_ranked_list(ranked, cal, eps).review_ids}")
