"""
Scoring lists that may be empty with NDCG'
==========================================

A ranked list is followed by one extra position, the terminal document,
whose gain is the share of relevant reviews retrieved, or 1 when there is
nothing to retrieve.  An empty list is then the right answer for an
unanswerable question.
"""

from pqa_reject import ndcg_prime

# answerable question with three relevant reviews, binary gains
for returned in ([1, 1, 1], [1, 1, 1, 0, 0], [1, 1]):
    print("answerable  ", returned, round(ndcg_prime(returned, [1, 1, 1], 3), 3))

# unanswerable question: each irrelevant review pushes the terminal down
for returned in ([], [0, 0], [0, 0, 0]):
    print("unanswerable", returned, round(ndcg_prime(returned, [], 0), 3))

# ten irrelevant reviews is the score every unfiltered ranker gets
print("ten irrelevant:", round(ndcg_prime([0] * 10, [], 0), 3))
