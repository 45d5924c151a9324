"""Classification of partially correct predictions into error categories.

A partial match is a prediction with EM = 0 and F1 > 0 against the gold
annotations. Such predictions fall into four categories: the gold answer is
multi-span, the prediction is a strict sub-span of the gold span, the
prediction strictly contains the gold span, or the two spans overlap without
containment. A fifth bucket collects inconsistent cases where tokens overlap
but spans do not (for example, the prediction matches a different occurrence
of the text); these are reported separately, never merged.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

from .spans import (
    Annotation,
    Prediction,
    SpanRelation,
    locate,
    relation,
    token_f1,
)


class ErrorCategory(Enum):
    MULTI_SPAN_GT = "multi_span_gt"
    PRED_SUBSET_GT = "pred_subset_gt"
    GT_SUBSET_PRED = "gt_subset_pred"
    PARTIAL_OVERLAP = "partial_overlap"
    UNRESOLVED_TEXT_OVERLAP = "unresolved_text_overlap"


# Display labels for the aligned text table.
_CATEGORY_LABELS = {
    ErrorCategory.PRED_SUBSET_GT: "Prediction < GT",
    ErrorCategory.GT_SUBSET_PRED: "GT < Prediction",
    ErrorCategory.PARTIAL_OVERLAP: "Prediction n GT != 0",
    ErrorCategory.MULTI_SPAN_GT: "Multi-Span GT",
    ErrorCategory.UNRESOLVED_TEXT_OVERLAP: "Unresolved text overlap",
}

_SINGLE_SPAN_CATEGORIES = (
    ErrorCategory.PRED_SUBSET_GT,
    ErrorCategory.GT_SUBSET_PRED,
    ErrorCategory.PARTIAL_OVERLAP,
)


def is_partial_match(em: int, f1: float) -> bool:
    """True iff the prediction partially matches the gold (EM = 0, F1 > 0)."""
    return em == 0 and f1 > 0.0


def select_reference_annotation(
    pred: Prediction, gts: list[Annotation] | tuple[Annotation, ...]
) -> Annotation:
    """Pick the annotation closest to the prediction by token F1.

    Ties break toward the annotation whose first span starts earliest, then
    toward the earlier list position.
    """
    if not gts:
        raise ValueError("select_reference_annotation requires at least one annotation")
    best = None
    best_key = None
    for idx, ann in enumerate(gts):
        key = (-token_f1(pred.text, ann.surface), ann.spans[0].start, idx)
        if best_key is None or key < best_key:
            best, best_key = ann, key
    return best


def classify(pred: Prediction, ref: Annotation, context: str) -> ErrorCategory:
    """Assign the error category of a partial-match prediction.

    The multi-span check precedes the span-relation checks. For single-span
    references the category follows the character-interval relation between
    the prediction span and the gold span; a prediction without a span is
    located in the context using the gold span as hint. Equal or disjoint
    spans under a claimed partial match indicate that the token overlap comes
    from a different occurrence and yield UNRESOLVED_TEXT_OVERLAP.
    """
    if ref.is_multi_span:
        return ErrorCategory.MULTI_SPAN_GT
    gt_span = ref.spans[0]
    pred_span = pred.span if pred.span is not None else locate(pred.text, context, hint=gt_span)
    rel = relation(pred_span, gt_span)
    if rel is SpanRelation.B_CONTAINS_A:
        return ErrorCategory.PRED_SUBSET_GT
    if rel is SpanRelation.A_CONTAINS_B:
        return ErrorCategory.GT_SUBSET_PRED
    if rel is SpanRelation.OVERLAP:
        return ErrorCategory.PARTIAL_OVERLAP
    return ErrorCategory.UNRESOLVED_TEXT_OVERLAP


@dataclass
class TaxonomyReport:
    """Per-category counts over a set of partial-match cases."""

    counts: dict[ErrorCategory, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, category: ErrorCategory) -> int:
        return self.counts.get(category, 0)

    def percent(self, category: ErrorCategory) -> float:
        if self.total == 0:
            return 0.0
        return 100.0 * self.count(category) / self.total

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["category", "count", "percent"])
        for cat in ErrorCategory:
            if cat is ErrorCategory.UNRESOLVED_TEXT_OVERLAP and self.count(cat) == 0:
                continue
            writer.writerow([cat.value, self.count(cat), repr(self.percent(cat))])
        writer.writerow(["total", self.total, "100.0" if self.total else "0.0"])
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned table: single-span subtotal with indented subcategories,
        then the multi-span row."""
        single_total = sum(self.count(c) for c in _SINGLE_SPAN_CATEGORIES)
        single_pct = 100.0 * single_total / self.total if self.total else 0.0
        rows = [("Single-Span GT", single_total, single_pct)]
        for cat in _SINGLE_SPAN_CATEGORIES:
            rows.append(("  " + _CATEGORY_LABELS[cat], self.count(cat), self.percent(cat)))
        rows.append((_CATEGORY_LABELS[ErrorCategory.MULTI_SPAN_GT],
                     self.count(ErrorCategory.MULTI_SPAN_GT),
                     self.percent(ErrorCategory.MULTI_SPAN_GT)))
        if self.count(ErrorCategory.UNRESOLVED_TEXT_OVERLAP):
            cat = ErrorCategory.UNRESOLVED_TEXT_OVERLAP
            rows.append((_CATEGORY_LABELS[cat], self.count(cat), self.percent(cat)))
        width = max(len(r[0]) for r in rows)
        lines = [f"{'Error':<{width}}  Count  %"]
        for label, count, pct in rows:
            lines.append(f"{label:<{width}}  {count:>5}  {pct:.0f}")
        lines.append(f"{'Total':<{width}}  {self.total:>5}  {100 if self.total else 0:.0f}")
        return "\n".join(lines) + "\n"


def distribution(
    cases: list[tuple[Prediction, list[Annotation] | tuple[Annotation, ...], str]],
) -> TaxonomyReport:
    """Classify every (prediction, annotations, context) case and count
    categories. Each case must already be a partial match."""
    report = TaxonomyReport()
    for pred, gts, context in cases:
        ref = select_reference_annotation(pred, gts)
        cat = classify(pred, ref, context)
        report.counts[cat] = report.counts.get(cat, 0) + 1
    return report
