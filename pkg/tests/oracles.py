"""Brute-force reference implementations, kept independent of the package."""

import math


def ndcg_prime_bruteforce(returned, relevant, d_cap=10):
    """NDCG' computed term by term from its definition.

    ``relevant`` lists the gain of every ground-truth relevant document.
    """
    returned = list(returned[:d_cap])
    n_rel = len(relevant)

    def term(gains):
        if n_rel == 0:
            return 1.0
        total = 0.0
        for g in gains:
            total += g
        return total / n_rel

    def discounted(gains):
        total = 0.0
        for rank in range(1, len(gains) + 1):
            total += gains[rank - 1] / (math.log(rank + 1) / math.log(2))
        return total

    system = returned + [term(returned)]
    best = sorted(relevant, reverse=True)
    best.append(term(best))
    ideal = []
    for rank in range(len(returned) + 1):
        ideal.append(best[rank] if rank < len(best) else 0.0)
    return discounted(system) / discounted(ideal)


def p_value_bruteforce(calibration, alpha_new):
    """(#{a in calibration : a >= alpha_new} + 1) / (n + 1) by explicit loop."""
    hits = 0
    for a in calibration:
        if a >= alpha_new:
            hits += 1
    return (hits + 1) / (len(calibration) + 1)
