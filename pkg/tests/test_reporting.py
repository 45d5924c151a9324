import pytest

from spancorrect.reporting import (
    CategoryCorrectionStats,
    ChangeStats,
    category_correction_stats,
    change_stats,
    delta_matrix,
    evaluate_predictions,
)
from spancorrect.spans import Prediction
from spancorrect.taxonomy import ErrorCategory

from fixtures import example_with_answer


def corpus():
    return [
        example_with_answer("e0", "q0", "the gate was red that day .", "red"),
        example_with_answer("e1", "q1", "the tower was tall that day .", "tall"),
        example_with_answer("e2", "q2", "the lane was long that day .", "long"),
        example_with_answer("e3", "q3", "the pond was deep that day .", "deep"),
    ]


def preds(texts):
    return {f"e{i}": Prediction(example_id=f"e{i}", text=t) for i, t in enumerate(texts)}


class TestEvaluatePredictions:
    def test_identity_scores_100(self):
        gold = corpus()
        p = preds(["red", "tall", "long", "deep"])
        s = evaluate_predictions(gold, p)
        assert s.em == 100.0 and s.f1 == 100.0 and s.n == 4

    def test_half_exact_half_disjoint(self):
        gold = corpus()
        p = preds(["red", "tall", "nothing here", "also wrong"])
        s = evaluate_predictions(gold, p)
        assert s.em == 50.0 and s.f1 == 50.0

    def test_partial_matches_raise_f1_above_em(self):
        gold = corpus()
        p = preds(["was red", "tall", "long", "deep"])
        s = evaluate_predictions(gold, p)
        assert s.em == 75.0
        assert s.f1 > s.em

    def test_missing_prediction_rejected(self):
        gold = corpus()
        p = preds(["red", "tall", "long"])
        with pytest.raises(KeyError):
            evaluate_predictions(gold, p)

    def test_extra_prediction_rejected(self):
        gold = corpus()
        p = preds(["red", "tall", "long", "deep"])
        p["ghost"] = Prediction(example_id="ghost", text="x")
        with pytest.raises(KeyError):
            evaluate_predictions(gold, p)


class TestChangeStats:
    def test_no_changes(self):
        gold = corpus()
        p = preds(["red", "tall", "long", "deep"])
        stats = change_stats(p, dict(p), gold)
        assert stats.total_changed == 0
        assert stats.total_examples == 4
        assert stats.correct_to_correct == 0

    def test_planted_outcomes(self):
        gold = corpus()
        reader = preds(["red", "was tall", "was long", "deep"])
        corrector = preds(["gate", "tall", "lane was long", "deep"])
        stats = change_stats(reader, corrector, gold)
        # e0 correct->incorrect, e1 incorrect->correct,
        # e2 incorrect->incorrect (F1 down: 2/3 -> 1/2), e3 unchanged
        assert stats.total_changed == 3
        assert stats.correct_to_incorrect == 1
        assert stats.incorrect_to_correct == 1
        assert stats.incorrect_to_incorrect == 1
        assert stats.f1_decreased == 1
        assert stats.f1_increased == 0 and stats.f1_unchanged == 0

    def test_whitespace_only_difference_is_not_a_change(self):
        gold = corpus()
        reader = preds(["red", "tall", "long", "deep"])
        corrector = preds(["  red ", "tall", "long", "deep"])
        stats = change_stats(reader, corrector, gold)
        assert stats.total_changed == 0

    def test_cells_partition_changed_set(self):
        gold = corpus()
        reader = preds(["red", "was tall", "nothing", "was deep"])
        corrector = preds(["blue shoe", "tall", "long", "pond was deep"])
        stats = change_stats(reader, corrector, gold)
        cells = (
            stats.correct_to_correct
            + stats.correct_to_incorrect
            + stats.incorrect_to_correct
            + stats.incorrect_to_incorrect
        )
        assert cells == stats.total_changed
        assert (
            stats.f1_increased + stats.f1_decreased + stats.f1_unchanged
            == stats.incorrect_to_incorrect
        )

    def test_id_mismatch_rejected(self):
        gold = corpus()
        reader = preds(["red", "tall", "long", "deep"])
        corrector = dict(reader)
        corrector.pop("e3")
        with pytest.raises(KeyError):
            change_stats(reader, corrector, gold)

    def test_text_rendering(self):
        stats = ChangeStats(
            correct_to_correct=45,
            correct_to_incorrect=43,
            incorrect_to_correct=109,
            incorrect_to_incorrect=253,
            f1_increased=135,
            f1_decreased=66,
            f1_unchanged=52,
            total_changed=450,
            total_examples=3456,
        )
        text = stats.to_text()
        assert "450 of 3456" in text
        assert "45 (10%)" in text
        assert "109 (24%)" in text
        assert "253 (56%)" in text
        csv_text = stats.to_csv()
        assert "incorrect_to_correct,109" in csv_text


class TestCategoryCorrectionStats:
    def test_identity_corrector_fixes_nothing(self):
        gold = corpus()
        cases = [("e1", ErrorCategory.PRED_SUBSET_GT), ("e2", ErrorCategory.GT_SUBSET_PRED)]
        corrector = preds(["red", "was tall", "was long", "deep"])  # still partial
        stats = category_correction_stats(cases, corrector, gold)
        assert stats.totals[ErrorCategory.PRED_SUBSET_GT] == 1
        assert stats.corrected.get(ErrorCategory.PRED_SUBSET_GT, 0) == 0

    def test_planted_full_correction_of_one_category(self):
        gold = corpus()
        cases = [
            ("e0", ErrorCategory.GT_SUBSET_PRED),
            ("e1", ErrorCategory.GT_SUBSET_PRED),
            ("e2", ErrorCategory.PRED_SUBSET_GT),
        ]
        corrector = preds(["red", "tall", "still wrong long-ish", "deep"])
        stats = category_correction_stats(cases, corrector, gold)
        assert stats.totals[ErrorCategory.GT_SUBSET_PRED] == 2
        assert stats.corrected[ErrorCategory.GT_SUBSET_PRED] == 2
        assert stats.corrected.get(ErrorCategory.PRED_SUBSET_GT, 0) == 0

    def test_multi_span_not_applicable(self):
        gold = corpus()
        cases = [("e0", ErrorCategory.MULTI_SPAN_GT)]
        corrector = preds(["red", "tall", "long", "deep"])
        stats = category_correction_stats(cases, corrector, gold)
        assert stats.totals[ErrorCategory.MULTI_SPAN_GT] == 1
        assert ErrorCategory.MULTI_SPAN_GT not in stats.corrected

    def test_rendering_shape(self):
        stats = CategoryCorrectionStats(
            totals={
                ErrorCategory.GT_SUBSET_PRED: 165,
                ErrorCategory.PRED_SUBSET_GT: 191,
                ErrorCategory.PARTIAL_OVERLAP: 37,
                ErrorCategory.MULTI_SPAN_GT: 194,
            },
            corrected={
                ErrorCategory.GT_SUBSET_PRED: 62,
                ErrorCategory.PRED_SUBSET_GT: 18,
                ErrorCategory.PARTIAL_OVERLAP: 8,
            },
        )
        text = stats.to_text()
        assert "165 (28%)" in text and "62 (38%)" in text
        assert "191 (33%)" in text and "18 (9%)" in text
        assert "37 (6%)" in text and "8 (22%)" in text
        assert text.rstrip().splitlines()[-1].rstrip().endswith("-")
        csv_text = stats.to_csv()
        assert "multi_span_gt,194," in csv_text

    def test_corrected_never_exceeds_total(self):
        gold = corpus()
        cases = [("e0", ErrorCategory.PARTIAL_OVERLAP)]
        corrector = preds(["red", "tall", "long", "deep"])
        stats = category_correction_stats(cases, corrector, gold)
        for cat, total in stats.totals.items():
            assert stats.corrected.get(cat, 0) <= total


class TestDeltaMatrix:
    langs = ("en", "es", "hi", "vi", "de", "ar", "zh")

    def grid(self, value):
        return {(q, c): value for q in self.langs for c in self.langs}

    def test_zero_when_equal(self):
        base = self.grid(40.0)
        m = delta_matrix(base, dict(base))
        assert all(v == 0.0 for v in m.deltas.values())

    def test_hand_column_average(self):
        base = {("en", "en"): 40.0, ("en", "es"): 40.0, ("es", "en"): 40.0, ("es", "es"): 40.0}
        sys = {("en", "en"): 41.0, ("en", "es"): 40.0, ("es", "en"): 43.0, ("es", "es"): 40.0}
        m = delta_matrix(base, sys)
        assert m.column_average("en") == pytest.approx(2.0)
        assert m.column_average("es") == pytest.approx(0.0)

    def test_column_average_display_rounding(self):
        # one column of per-question-language gains averaging to +0.8
        gains = {"en": 0.2, "es": 0.9, "hi": 0.8, "vi": 0.9, "de": 1.7, "ar": 0.5, "zh": 0.9}
        base = self.grid(40.0)
        sys = dict(base)
        for q, g in gains.items():
            sys[(q, "en")] = 40.0 + g
        m = delta_matrix(base, sys)
        assert m.column_average("en") == pytest.approx(sum(gains.values()) / 7)
        assert f"{m.column_average('en'):.1f}" == "0.8"
        assert m.to_text().splitlines()[-1].split()[1] == "0.8"

    def test_antisymmetric(self):
        base = self.grid(40.0)
        sys = {k: 40.0 + (i % 5) for i, k in enumerate(sorted(base))}
        forward = delta_matrix(base, sys)
        backward = delta_matrix(sys, base)
        for key in forward.deltas:
            assert forward.deltas[key] == -backward.deltas[key]

    def test_key_mismatch_rejected(self):
        base = self.grid(40.0)
        sys = dict(base)
        sys.pop(("en", "en"))
        with pytest.raises(KeyError):
            delta_matrix(base, sys)

    def test_incomplete_grid_rejected(self):
        base = {("en", "en"): 1.0, ("es", "es"): 2.0}
        with pytest.raises(KeyError):
            delta_matrix(base, dict(base))
