"""Analysis reports: aggregate EM/F1, correction change statistics,
per-category correction rates, and the cross-lingual delta matrix.

Every report is a pure function of its inputs and renders both an aligned
plain-text table and a CSV with unrounded values; display rounding never
feeds back into computation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .spans import MRCExample, Prediction, em_max, f1_max, normalize_text
from .taxonomy import ErrorCategory

# F1 movements closer than this are reported as unchanged.
_F1_EPS = 1e-12


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate EM/F1 on a 0-100 scale with per-example scores."""

    n: int
    em: float
    f1: float
    per_example_em: dict[str, int]
    per_example_f1: dict[str, float]

    def to_dict(self) -> dict:
        return {"n": self.n, "exact_match": self.em, "f1": self.f1}


def evaluate_predictions(
    examples: list[MRCExample], predictions: dict[str, Prediction], strip_articles: bool = True
) -> EvalSummary:
    """Score predictions against gold annotations; prediction ids must match
    the dataset ids exactly."""
    gold_ids = set(ex.id for ex in examples)
    missing = sorted(gold_ids - set(predictions))
    if missing:
        raise KeyError(f"missing predictions for example ids: {missing[:5]}")
    extra = sorted(set(predictions) - gold_ids)
    if extra:
        raise KeyError(f"predictions for unknown example ids: {extra[:5]}")
    per_em: dict[str, int] = {}
    per_f1: dict[str, float] = {}
    for ex in examples:
        pred = predictions[ex.id]
        per_em[ex.id] = em_max(pred.text, ex.ground_truths, strip_articles)
        per_f1[ex.id] = f1_max(pred.text, ex.ground_truths, strip_articles)
    n = len(examples)
    if n == 0:
        raise ValueError("cannot evaluate an empty dataset")
    return EvalSummary(
        n=n,
        em=100.0 * sum(per_em.values()) / n,
        f1=100.0 * sum(per_f1.values()) / n,
        per_example_em=per_em,
        per_example_f1=per_f1,
    )


@dataclass
class ChangeStats:
    """Outcomes of corrector alterations, over examples whose normalized
    corrector text differs from the reader's."""

    correct_to_correct: int = 0
    correct_to_incorrect: int = 0
    incorrect_to_correct: int = 0
    incorrect_to_incorrect: int = 0
    f1_increased: int = 0
    f1_decreased: int = 0
    f1_unchanged: int = 0
    total_changed: int = 0
    total_examples: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell", "count"])
        for name in (
            "correct_to_correct",
            "correct_to_incorrect",
            "incorrect_to_correct",
            "incorrect_to_incorrect",
            "f1_increased",
            "f1_decreased",
            "f1_unchanged",
            "total_changed",
            "total_examples",
        ):
            w.writerow([name, getattr(self, name)])
        return buf.getvalue()

    def to_text(self) -> str:
        def pct(x: int) -> str:
            return f"{100.0 * x / self.total_changed:.0f}%" if self.total_changed else "-"

        lines = [
            "Changed predictions (normalized text differs): "
            f"{self.total_changed} of {self.total_examples}",
            "reader \\ corrector      Correct            Incorrect",
            f"Correct            {self.correct_to_correct:>6} ({pct(self.correct_to_correct)})"
            f"      {self.correct_to_incorrect:>6} ({pct(self.correct_to_incorrect)})",
            f"Incorrect          {self.incorrect_to_correct:>6} ({pct(self.incorrect_to_correct)})"
            f"      {self.incorrect_to_incorrect:>6} ({pct(self.incorrect_to_incorrect)})",
            "Within incorrect -> incorrect: "
            f"F1 up {self.f1_increased} ({pct(self.f1_increased)}), "
            f"F1 down {self.f1_decreased} ({pct(self.f1_decreased)}), "
            f"F1 unchanged {self.f1_unchanged} ({pct(self.f1_unchanged)})",
        ]
        return "\n".join(lines) + "\n"


def change_stats(
    reader_preds: dict[str, Prediction],
    corrector_preds: dict[str, Prediction],
    gold: list[MRCExample],
    strip_articles: bool = True,
) -> ChangeStats:
    """Contingency counts for alterations made by the corrector."""
    gold_ids = set(ex.id for ex in gold)
    if gold_ids != set(reader_preds) or gold_ids != set(corrector_preds):
        raise KeyError("reader, corrector, and gold must cover identical example ids")
    stats = ChangeStats(total_examples=len(gold))
    for ex in gold:
        r = reader_preds[ex.id]
        c = corrector_preds[ex.id]
        if normalize_text(c.text, strip_articles) == normalize_text(r.text, strip_articles):
            continue
        stats.total_changed += 1
        em_r = em_max(r.text, ex.ground_truths, strip_articles)
        em_c = em_max(c.text, ex.ground_truths, strip_articles)
        if em_r == 1 and em_c == 1:
            stats.correct_to_correct += 1
        elif em_r == 1:
            stats.correct_to_incorrect += 1
        elif em_c == 1:
            stats.incorrect_to_correct += 1
        else:
            stats.incorrect_to_incorrect += 1
            f1_r = f1_max(r.text, ex.ground_truths, strip_articles)
            f1_c = f1_max(c.text, ex.ground_truths, strip_articles)
            if f1_c > f1_r + _F1_EPS:
                stats.f1_increased += 1
            elif f1_c < f1_r - _F1_EPS:
                stats.f1_decreased += 1
            else:
                stats.f1_unchanged += 1
    return stats


_CATEGORY_ORDER = (
    ErrorCategory.GT_SUBSET_PRED,
    ErrorCategory.PRED_SUBSET_GT,
    ErrorCategory.PARTIAL_OVERLAP,
    ErrorCategory.MULTI_SPAN_GT,
)

_CATEGORY_TEXT = {
    ErrorCategory.GT_SUBSET_PRED: "GT < Prediction",
    ErrorCategory.PRED_SUBSET_GT: "Prediction < GT",
    ErrorCategory.PARTIAL_OVERLAP: "Prediction n GT != 0",
    ErrorCategory.MULTI_SPAN_GT: "Multi-span GT",
    ErrorCategory.UNRESOLVED_TEXT_OVERLAP: "Unresolved text overlap",
}


@dataclass
class CategoryCorrectionStats:
    """Per-category totals and corrected-to-exact counts over partial-match
    reader predictions. Multi-span rows report corrected as not applicable:
    a single-span system cannot match a multi-span gold."""

    totals: dict[ErrorCategory, int] = field(default_factory=dict)
    corrected: dict[ErrorCategory, int] = field(default_factory=dict)

    @property
    def grand_total(self) -> int:
        return sum(self.totals.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["category", "total", "corrected"])
        for cat in _CATEGORY_ORDER + (ErrorCategory.UNRESOLVED_TEXT_OVERLAP,):
            if cat is ErrorCategory.UNRESOLVED_TEXT_OVERLAP and not self.totals.get(cat):
                continue
            corrected = "" if cat is ErrorCategory.MULTI_SPAN_GT else self.corrected.get(cat, 0)
            w.writerow([cat.value, self.totals.get(cat, 0), corrected])
        return buf.getvalue()

    def to_text(self) -> str:
        total_all = self.grand_total
        lines = [f"{'Error class':<24} {'Total':>12} {'Corrected':>12}"]
        for cat in _CATEGORY_ORDER + (ErrorCategory.UNRESOLVED_TEXT_OVERLAP,):
            total = self.totals.get(cat, 0)
            if cat is ErrorCategory.UNRESOLVED_TEXT_OVERLAP and not total:
                continue
            share = f"({100.0 * total / total_all:.0f}%)" if total_all else "(-)"
            if cat is ErrorCategory.MULTI_SPAN_GT:
                fixed = "-"
            else:
                k = self.corrected.get(cat, 0)
                fixed = f"{k} ({100.0 * k / total:.0f}%)" if total else "0 (-)"
            lines.append(f"{_CATEGORY_TEXT[cat]:<24} {f'{total} {share}':>12} {fixed:>12}")
        return "\n".join(lines) + "\n"


def category_correction_stats(
    cases: list[tuple[str, ErrorCategory]],
    corrector_preds: dict[str, Prediction],
    gold: list[MRCExample],
    strip_articles: bool = True,
) -> CategoryCorrectionStats:
    """Count, per error category, how many partial-match cases the corrector
    resolved to an exact match. ``cases`` pairs example ids with their
    taxonomy label."""
    by_id = {ex.id: ex for ex in gold}
    stats = CategoryCorrectionStats()
    for ex_id, cat in cases:
        if ex_id not in by_id:
            raise KeyError(f"case references unknown example id {ex_id!r}")
        stats.totals[cat] = stats.totals.get(cat, 0) + 1
        if cat is ErrorCategory.MULTI_SPAN_GT:
            continue
        pred = corrector_preds.get(ex_id)
        if pred is not None and em_max(pred.text, by_id[ex_id].ground_truths, strip_articles) == 1:
            stats.corrected[cat] = stats.corrected.get(cat, 0) + 1
    return stats


@dataclass
class DeltaMatrix:
    """EM deltas keyed by (question language, context language), with
    per-context-language column averages."""

    question_langs: tuple[str, ...]
    context_langs: tuple[str, ...]
    deltas: dict[tuple[str, str], float]

    def column_average(self, c_lang: str) -> float:
        values = [self.deltas[(q, c_lang)] for q in self.question_langs]
        return sum(values) / len(values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q\\c"] + list(self.context_langs))
        for q in self.question_langs:
            w.writerow([q] + [repr(self.deltas[(q, c)]) for c in self.context_langs])
        w.writerow(["avg"] + [repr(self.column_average(c)) for c in self.context_langs])
        return buf.getvalue()

    def to_text(self) -> str:
        """Rows are question languages, columns context languages; cells are
        deltas rounded to one decimal for display only."""
        header = "q\\c " + " ".join(f"{c:>6}" for c in self.context_langs)
        lines = [header]
        for q in self.question_langs:
            cells = " ".join(f"{self.deltas[(q, c)]:>6.1f}" for c in self.context_langs)
            lines.append(f"{q:<4}{cells}")
        avg = " ".join(f"{self.column_average(c):>6.1f}" for c in self.context_langs)
        lines.append(f"{'AVG':<4}{avg}")
        return "\n".join(lines) + "\n"


def delta_matrix(
    baseline: dict[tuple[str, str], float], system: dict[tuple[str, str], float]
) -> DeltaMatrix:
    """Per-cell EM difference (system - baseline) over language pairs."""
    if set(baseline) != set(system):
        raise KeyError("baseline and system must cover the same language pairs")
    q_langs = tuple(dict.fromkeys(q for q, _ in baseline))
    c_langs = tuple(dict.fromkeys(c for _, c in baseline))
    expected = {(q, c) for q in q_langs for c in c_langs}
    if expected != set(baseline):
        raise KeyError("language pairs must form a full (question, context) grid")
    deltas = {key: system[key] - baseline[key] for key in baseline}
    return DeltaMatrix(question_langs=q_langs, context_langs=c_langs, deltas=deltas)
