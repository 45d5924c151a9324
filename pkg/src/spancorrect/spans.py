"""Character-interval spans, answer normalization, and EM/F1 metrics.

Spans are half-open character intervals into a context string. Offsets
count abstract characters, never bytes, so files written by one process
read back identically in another.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from enum import Enum


class SpanNotFound(ValueError):
    """A prediction text does not occur in its context."""


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end); never empty."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"span start must be >= 0, got {self.start}")
        if self.start >= self.end:
            raise ValueError(f"span must be non-empty, got [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def text(self, context: str) -> str:
        if self.end > len(context):
            raise ValueError(f"span [{self.start}, {self.end}) exceeds context length {len(context)}")
        return context[self.start : self.end]

    def shift(self, offset: int) -> "CharSpan":
        return CharSpan(self.start + offset, self.end + offset)


class SpanRelation(Enum):
    EQUAL = "equal"
    A_CONTAINS_B = "a_contains_b"
    B_CONTAINS_A = "b_contains_a"
    OVERLAP = "overlap"
    DISJOINT = "disjoint"


def relation(a: CharSpan, b: CharSpan) -> SpanRelation:
    """Classify the interval relation between two spans.

    Containment is strict: EQUAL is its own relation, and OVERLAP means the
    intersection is non-empty without either span containing the other.
    Exactly one relation holds for any pair of valid spans.
    """
    if a.start == b.start and a.end == b.end:
        return SpanRelation.EQUAL
    if a.start <= b.start and b.end <= a.end:
        return SpanRelation.A_CONTAINS_B
    if b.start <= a.start and a.end <= b.end:
        return SpanRelation.B_CONTAINS_A
    if a.start < b.end and b.start < a.end:
        return SpanRelation.OVERLAP
    return SpanRelation.DISJOINT


@dataclass(frozen=True)
class Annotation:
    """One gold answer: ordered, pairwise-disjoint spans with surface texts.

    Single-span answers are the common case; multi-span answers hold several
    non-contiguous context subsequences. ``surface`` joins span texts with
    single spaces in span order and is the string used for text metrics.
    """

    spans: tuple[CharSpan, ...]
    texts: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.spans:
            raise ValueError("annotation must have at least one span")
        if len(self.spans) != len(self.texts):
            raise ValueError("spans and texts must be parallel")
        for prev, cur in zip(self.spans, self.spans[1:]):
            if cur.start < prev.end:
                raise ValueError("annotation spans must be sorted and disjoint")

    @classmethod
    def from_context(cls, context: str, spans: list[CharSpan] | tuple[CharSpan, ...]) -> "Annotation":
        spans = tuple(spans)
        return cls(spans=spans, texts=tuple(s.text(context) for s in spans))

    @property
    def is_multi_span(self) -> bool:
        return len(self.spans) > 1

    @property
    def surface(self) -> str:
        return " ".join(self.texts)


@dataclass(frozen=True)
class MRCExample:
    """One question/context pair with one or more gold annotations."""

    id: str
    question: str
    context: str
    ground_truths: tuple[Annotation, ...]

    def __post_init__(self) -> None:
        if not self.ground_truths:
            raise ValueError(f"example {self.id!r} has no ground truth")
        for ann in self.ground_truths:
            for span, text in zip(ann.spans, ann.texts):
                if span.text(self.context) != text:
                    raise ValueError(
                        f"example {self.id!r}: annotation text {text!r} does not match "
                        f"context substring at [{span.start}, {span.end})"
                    )

    @property
    def gt_texts(self) -> list[str]:
        return [ann.surface for ann in self.ground_truths]

    def single_span_annotations(self) -> list[Annotation]:
        return [ann for ann in self.ground_truths if not ann.is_multi_span]


@dataclass(frozen=True)
class Prediction:
    """A reader or corrector output span; score is on an additive log scale."""

    example_id: str
    text: str
    span: CharSpan | None = None
    score: float = 0.0


# NBestList: predictions for one example sorted by non-increasing score.
NBestList = list[Prediction]


_ARTICLES = frozenset({"a", "an", "the"})
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_text(s: str, strip_articles: bool = True) -> str:
    """SQuAD-convention normalization: lowercase, drop punctuation, drop
    standalone articles, collapse whitespace.

    ``strip_articles=False`` turns off the English-specific article rule for
    non-English evaluation.
    """
    s = s.lower().translate(_PUNCT_TABLE)
    tokens = s.split()
    if strip_articles:
        tokens = [t for t in tokens if t not in _ARTICLES]
    return " ".join(tokens)


def exact_match(pred_text: str, gt_texts: list[str], strip_articles: bool = True) -> int:
    """1 iff the normalized prediction equals any normalized gold text."""
    if not gt_texts:
        raise ValueError("exact_match requires at least one ground-truth text")
    pred = normalize_text(pred_text, strip_articles)
    return int(any(pred == normalize_text(g, strip_articles) for g in gt_texts))


def token_f1(pred_text: str, gt_text: str, strip_articles: bool = True) -> float:
    """Token-level F1 between normalized strings.

    If either normalized token list is empty, F1 is 1.0 when both are empty
    and 0.0 otherwise.
    """
    pred_tokens = normalize_text(pred_text, strip_articles).split()
    gt_tokens = normalize_text(gt_text, strip_articles).split()
    if not pred_tokens or not gt_tokens:
        return float(pred_tokens == gt_tokens)
    overlap = sum((Counter(pred_tokens) & Counter(gt_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gt_tokens)
    return 2 * precision * recall / (precision + recall)


def f1_max(pred_text: str, annotations: list[Annotation] | tuple[Annotation, ...], strip_articles: bool = True) -> float:
    """Maximum token F1 of the prediction against each annotation's surface."""
    if not annotations:
        raise ValueError("f1_max requires at least one annotation")
    return max(token_f1(pred_text, ann.surface, strip_articles) for ann in annotations)


def em_max(pred_text: str, annotations: list[Annotation] | tuple[Annotation, ...], strip_articles: bool = True) -> int:
    """Exact match against the surface texts of all annotations."""
    if not annotations:
        raise ValueError("em_max requires at least one annotation")
    return exact_match(pred_text, [ann.surface for ann in annotations], strip_articles)


def find_occurrences(text: str, context: str) -> list[int]:
    """All (possibly overlapping) start offsets of ``text`` in ``context``."""
    if not text:
        return []
    starts = []
    idx = context.find(text)
    while idx != -1:
        starts.append(idx)
        idx = context.find(text, idx + 1)
    return starts


def locate(text: str, context: str, hint: CharSpan | None = None) -> CharSpan:
    """Find ``text`` in ``context`` as a CharSpan.

    With several occurrences, returns the one whose start is nearest the
    hint's start (ties broken toward the earlier occurrence); without a hint,
    the earliest occurrence. Raises SpanNotFound when absent.
    """
    starts = find_occurrences(text, context)
    if not starts:
        raise SpanNotFound(f"text {text!r} not found in context")
    if hint is None:
        best = starts[0]
    else:
        best = min(starts, key=lambda s: (abs(s - hint.start), s))
    return CharSpan(best, best + len(text))
