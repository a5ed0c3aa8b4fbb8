import math

import numpy as np
import pytest

from builders import hand_corpus, kept_score, slow_epsilon_objective, slow_threshold_objective, synthetic
from pqa_reject import conformal
from pqa_reject.errors import DataError, ValidationError
from pqa_reject.tuning import (CalibrationIndex, build_fold_plan, epsilon_grid, epsilon_objective,
                               evaluate_vanilla, loo_experiment, threshold_grid, threshold_objective,
                               tune_epsilon, tune_score_threshold)


def test_epsilon_grid():
    grid = epsilon_grid()
    assert len(grid) == 101 and grid[0] == 0.0 and grid[-1] == 1.0
    assert grid[37] == 0.37
    assert list(epsilon_grid(0.3)) == [0.0, 0.3, 0.6, 0.9, 1.0]
    with pytest.raises(ValidationError):
        epsilon_grid(0)


class TestVanilla:
    def test_unanswerable_ten_irrelevant(self):
        layout = {
            "qa": [("a0", 3.0, 0.9)] + [(f"a{i}", 0.0, 0.5 - i / 100) for i in range(1, 12)],
            "qu": [(f"u{i}", 1.0, 0.9 - i / 100) for i in range(12)],
        }
        tc, ranked, _ = hand_corpus(layout)
        agg = evaluate_vanilla(tc.question_ids, ranked, tc)
        assert agg.n_u == pytest.approx(1 / math.log2(12), abs=1e-12)
        assert agg.n_u == pytest.approx(0.279, abs=1e-3)

    def test_perfect_list(self):
        layout = {"qa": [("a0", 3.0, 0.9), ("a1", 2.0, 0.8)], "qu": [("u0", 0.0, 0.3)]}
        tc, ranked, _ = hand_corpus(layout, depth=2)
        agg = evaluate_vanilla(tc.question_ids, ranked, tc, d_cap=2)
        assert agg.n_a == pytest.approx(1.0)

    def test_three_question_hand_computation(self):
        layout = {
            "q1": [("a", 3.0, 0.9), ("b", 0.0, 0.8)],
            "q2": [("c", 0.0, 0.7), ("d", 2.0, 0.6)],
            "q3": [("e", 0.0, 0.5)],
        }
        tc, ranked, _ = hand_corpus(layout)
        agg = evaluate_vanilla(tc.question_ids, ranked, tc)
        q1 = (3 + 0 + 3 / 2) / (3 + 3 / math.log2(3))
        q2 = (0 + 2 / math.log2(3) + 2 / 2) / (2 + 2 / math.log2(3))
        q3 = (0 + 1 / math.log2(3)) / 1
        assert agg.n_a == pytest.approx((q1 + q2) / 2, abs=1e-12)
        assert agg.n_u == pytest.approx(q3, abs=1e-12)
        assert agg.n_au == pytest.approx(math.sqrt((q1 + q2) / 2 * q3), abs=1e-12)

    def test_missing_list(self):
        layout = {"q1": [("a", 3.0, 0.9)], "q2": [("b", 0.0, 0.5)]}
        tc, ranked, _ = hand_corpus(layout)
        del ranked["q2"]
        with pytest.raises(DataError):
            evaluate_vanilla(tc.question_ids, ranked, tc)


class TestFoldPlan:
    def test_no_leakage_and_partition(self):
        ids = ["q3", "q1", "q2", "q0"]
        plan = build_fold_plan(ids, nested=True)
        assert [t for t, _ in plan.outer] == sorted(ids)
        for test, validation in plan.outer:
            assert test not in validation
            assert len(validation) == len(ids) - 1
            assert set(validation) | {test} == set(ids)
            for inner_val, calibration in plan.inner(test):
                assert inner_val not in calibration and test not in calibration
                assert len(calibration) == len(ids) - 2

    def test_plain_plan_has_no_inner(self):
        with pytest.raises(ValidationError):
            build_fold_plan(["a", "b"]).inner("a")


class TestThreshold:
    def test_grid_construction(self):
        _, _, inst = hand_corpus({"q1": [("a", 3.0, 0.9), ("b", 0.0, 0.2)], "q2": [("c", 0.0, 0.5)]})
        np.testing.assert_allclose(threshold_grid(inst), [-0.8, 0.35, 0.7, 1.9])

    def test_all_irrelevant_picks_upper_sentinel(self):
        layout = {f"q{i}": [(f"r{i}-{j}", 0.0, 0.1 * (j + 1)) for j in range(4)] for i in range(3)}
        _, _, inst = hand_corpus(layout)
        grid = threshold_grid(inst)
        tuned = tune_score_threshold(inst)
        assert tuned.value == grid[-1]
        assert tuned.objective == pytest.approx(1.0)

    def test_all_relevant_perfect_picks_lower_sentinel(self):
        layout = {f"q{i}": [(f"r{i}-{j}", 3.0, 0.1 * (j + 1)) for j in range(4)] for i in range(3)}
        _, _, inst = hand_corpus(layout)
        tuned = tune_score_threshold(inst)
        assert tuned.value == threshold_grid(inst)[0]
        assert tuned.objective == pytest.approx(1.0)

    def test_threshold_lands_in_gap(self):
        layout = {
            "q1": [("a", 3.0, 0.9), ("b", 0.0, 0.3), ("c", 0.0, 0.2)],
            "q2": [("d", 3.0, 0.8), ("e", 3.0, 0.85), ("f", 0.0, 0.25)],
            "q3": [("g", 0.0, 0.35), ("h", 0.0, 0.1)],
        }
        _, _, inst = hand_corpus(layout)
        grid = threshold_grid(inst)
        objective = slow_threshold_objective(inst, grid)
        tuned = tune_score_threshold(inst)
        assert 0.35 < tuned.value < 0.8
        assert tuned.objective == pytest.approx(objective.max(), abs=1e-12)

    def test_fast_matches_slow(self):
        _, _, inst = synthetic(15, seed=4)
        grid = threshold_grid(inst)
        np.testing.assert_allclose(threshold_objective(inst, grid),
                                   slow_threshold_objective(inst, grid), rtol=0, atol=1e-12)

    def test_two_question_hand_trace(self):
        layout = {
            "qa": [("a1", 3.0, 0.9), ("a2", 0.0, 0.2)],
            "qu": [("u1", 0.0, 0.8), ("u2", 0.0, 0.1)],
        }
        _, _, inst = hand_corpus(layout)
        result = loo_experiment(inst, "thrs")
        fold_a, fold_u = result.folds
        # only unanswerable validation data: returning nothing is best
        assert fold_a.tuned.value == pytest.approx(1.8)
        assert fold_a.retained == () and fold_a.score.ndcg_prime == 0.0
        # only answerable validation data: cut between 0.9 and 0.2
        assert fold_u.tuned.value == pytest.approx(0.55)
        assert fold_u.tuned.objective == pytest.approx(1.0)
        assert fold_u.retained == ("u1",)
        assert fold_u.score.ndcg_prime == pytest.approx(1 / math.log2(3))
        assert result.aggregate.n_au == 0.0


class TestEpsilon:
    def test_index_matches_explicit_calibration(self):
        _, _, inst = synthetic(12, seed=8)
        index = CalibrationIndex(inst)
        for q in inst[:5]:
            exclude = {inst[-1].question_id}
            others = [o for o in inst if o is not q and o.question_id not in exclude]
            cal = conformal.calibrate(np.concatenate([o.cal_probabilities for o in others]),
                                      np.concatenate([o.cal_labels for o in others]))
            p1, p0 = conformal.p_values(cal, q.probabilities)
            f1, f0 = index.p_values(q.question_id, exclude=exclude)
            np.testing.assert_array_equal(f1, p1)
            np.testing.assert_array_equal(f0, p0)

    def test_grid_one_empties_everything(self):
        _, _, inst = synthetic(8, seed=3)
        tuned = tune_epsilon(inst, [1.0])
        assert tuned.value == 1.0
        # answerable lists all empty (n_a = 0), unanswerable lists perfect
        assert tuned.objective == 0.0

    def test_grid_zero_rejects_everything(self):
        tc, ranked, inst = synthetic(8, seed=3)
        objective = epsilon_objective(inst, [0.0])
        assert objective[0] == 0.0

    def test_needs_three_questions(self):
        _, _, inst = synthetic(2, seed=3)
        with pytest.raises(ValidationError):
            tune_epsilon(inst)

    def test_fast_matches_slow(self):
        _, _, inst = synthetic(10, seed=21)
        grid = epsilon_grid()
        np.testing.assert_allclose(epsilon_objective(inst, grid), slow_epsilon_objective(inst, grid),
                                   rtol=0, atol=1e-12)

    def test_planted_separable(self):
        config = dict(relevant_beta=(30.0, 1.0), irrelevant_beta=(1.0, 30.0), reviews_per_question=6)
        _, _, inst = synthetic(5, seed=2, **config)
        grid = epsilon_grid()
        objective = slow_epsilon_objective(inst, grid)
        tuned = tune_epsilon(inst, grid)
        band = grid[objective >= objective.max() - 1e-12]
        assert band[0] <= tuned.value <= band[-1]
        assert tuned.value == band[0]
        assert tuned.objective == pytest.approx(objective.max(), abs=1e-12)


class TestLOO:
    def test_vanilla_equals_evaluate_vanilla(self):
        tc, ranked, inst = synthetic(20, seed=5)
        assert loo_experiment(inst, "vanilla").aggregate == evaluate_vanilla(tc.question_ids, ranked, tc)

    def test_imcp_beats_vanilla_on_unanswerable(self):
        _, _, inst = synthetic(30, seed=6)
        vanilla = loo_experiment(inst, "vanilla").aggregate
        imcp = loo_experiment(inst, "imcp").aggregate
        assert imcp.n_u > vanilla.n_u

    def test_imcp_matches_slow_nested_loo(self):
        _, _, inst = synthetic(8, seed=13)
        grid = epsilon_grid(0.05)
        result = loo_experiment(inst, "imcp", grid)
        for fold in result.folds:
            val = [q for q in inst if q.question_id != fold.test_id]
            test = next(q for q in inst if q.question_id == fold.test_id)
            objective = slow_epsilon_objective(val, grid)
            assert fold.tuned.objective == pytest.approx(objective.max(), abs=1e-12)
            assert fold.tuned.value == grid[objective >= objective.max() - 1e-12][0]
            cal = conformal.calibrate(np.concatenate([q.cal_probabilities for q in val]),
                                      np.concatenate([q.cal_labels for q in val]))
            kept = conformal.filter_ranked_list(test.ranked, cal, fold.tuned.value)
            assert fold.retained == tuple(kept.review_ids)
            assert fold.score.ndcg_prime == pytest.approx(kept_score(test, kept.review_ids).ndcg_prime, abs=1e-12)

    def test_deterministic(self):
        _, _, inst = synthetic(12, seed=9)
        for method in ("thrs", "imcp"):
            assert loo_experiment(inst, method) == loo_experiment(inst, method)

    def test_retained_is_subsequence(self):
        _, _, inst = synthetic(12, seed=10)
        for method in ("thrs", "imcp"):
            for fold in loo_experiment(inst, method).folds:
                ids = next(q for q in inst if q.question_id == fold.test_id).ranked.review_ids
                it = iter(ids)
                assert all(r in it for r in fold.retained)

    def test_unknown_method(self):
        _, _, inst = synthetic(4, seed=1)
        with pytest.raises(ValidationError):
            loo_experiment(inst, "oracle")


def test_separated_classes_retain_mostly_relevant():
    tc, _, inst = synthetic(40, seed=0, relevant_beta=(30.0, 1.0), irrelevant_beta=(1.0, 30.0))
    kept = [(f.test_id, r) for f in loo_experiment(inst, "imcp").folds for r in f.retained]
    share = sum(tc.relevance(q, r) > 0 for q, r in kept) / len(kept)
    # measured at 1.0 on this seed
    assert len(kept) > 50 and share >= 0.95
