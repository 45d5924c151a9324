"""Corrector training-data generation.

The corrector learns from two kinds of examples derived from reader
predictions on the training set: identity examples that delimit the gold
answer itself (teaching "no correction needed") and correction examples that
delimit one of the reader's top-k incorrect predictions with the gold span as
target. Reader predictions on the training set come from a k-fold protocol:
train on all folds but one, predict the held-out fold, repeat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .spans import (
    CharSpan,
    MRCExample,
    NBestList,
    SpanNotFound,
    em_max,
    locate,
    normalize_text,
)


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of example ids to folds; sizes differ by at most one."""

    n_folds: int
    assignments: dict[str, int]
    seed: int

    def holdout_ids(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f == fold]

    def train_ids(self, fold: int) -> list[str]:
        return [i for i, f in self.assignments.items() if f != fold]


def make_fold_plan(example_ids: Sequence[str], n_folds: int, seed: int) -> FoldPlan:
    """Shuffled round-robin fold assignment, deterministic under seed."""
    ids = list(example_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("example ids must be unique")
    if n_folds < 2:
        raise ValueError(f"n_folds must be >= 2, got {n_folds}")
    if n_folds > len(ids):
        raise ValueError(f"n_folds={n_folds} exceeds the {len(ids)} available examples")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    assignments = {ids[int(j)]: int(pos) % n_folds for pos, j in enumerate(order)}
    # Preserve input id order in the mapping for stable iteration.
    assignments = {i: assignments[i] for i in ids}
    return FoldPlan(n_folds=n_folds, assignments=assignments, seed=seed)


def insert_delimiters(
    token_ids: Sequence[int],
    span: tuple[int, int],
    delimiter_id: int,
    limits: tuple[int, int] | None = None,
) -> list[int]:
    """Insert ``delimiter_id`` immediately before and after the half-open
    token interval ``span``. ``limits`` restricts the span to a segment of
    the sequence (for example the context segment)."""
    start, end = span
    lo, hi = limits if limits is not None else (0, len(token_ids))
    if not (0 <= lo <= start < end <= hi <= len(token_ids)):
        raise ValueError(
            f"span [{start}, {end}) out of bounds for segment [{lo}, {hi}) "
            f"of a length-{len(token_ids)} sequence"
        )
    out = list(token_ids[:start])
    out.append(delimiter_id)
    out.extend(token_ids[start:end])
    out.append(delimiter_id)
    out.extend(token_ids[end:])
    return out


@dataclass(frozen=True)
class CorrectorExample:
    """One corrector training instance in context character coordinates."""

    source_example_id: str
    marked_span: CharSpan
    target_span: CharSpan
    is_identity: bool
    source_score: float = 0.0

    def __post_init__(self) -> None:
        if self.is_identity != (self.marked_span == self.target_span):
            raise ValueError("is_identity must hold exactly when marked equals target")


@dataclass
class GenSummary:
    """Counters for a corrector data generation run."""

    examples: int = 0
    usable: int = 0
    identity: int = 0
    corrections: int = 0
    skipped_multi_span_only: int = 0
    skipped_correct_entries: int = 0
    skipped_duplicate_text: int = 0
    skipped_unlocatable: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def build_corrector_examples(
    example: MRCExample,
    nbest: NBestList,
    k: int,
    summary: GenSummary | None = None,
) -> list[CorrectorExample]:
    """Emit one identity example plus up to k correction examples.

    The identity example delimits the first single-span annotation; each
    correction example delimits one of the k highest-scoring n-best entries
    whose text is incorrect (EM = 0 against every annotation). Examples whose
    gold answers are all multi-span are skipped entirely. Duplicate n-best
    texts (same normalized string) count once toward k.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    summary = summary if summary is not None else GenSummary()
    summary.examples += 1
    single = example.single_span_annotations()
    if not single:
        summary.skipped_multi_span_only += 1
        return []
    summary.usable += 1
    gt_span = single[0].spans[0]
    out = [
        CorrectorExample(
            source_example_id=example.id,
            marked_span=gt_span,
            target_span=gt_span,
            is_identity=True,
        )
    ]
    summary.identity += 1
    seen_texts: set[str] = set()
    taken = 0
    for entry in nbest:
        if taken >= k:
            break
        if em_max(entry.text, example.ground_truths) == 1:
            summary.skipped_correct_entries += 1
            continue
        norm = normalize_text(entry.text)
        if norm in seen_texts:
            summary.skipped_duplicate_text += 1
            continue
        span = entry.span
        if span is None:
            try:
                span = locate(entry.text, example.context, hint=gt_span)
            except SpanNotFound:
                summary.skipped_unlocatable += 1
                continue
        seen_texts.add(norm)
        out.append(
            CorrectorExample(
                source_example_id=example.id,
                marked_span=span,
                target_span=gt_span,
                is_identity=span == gt_span,
                source_score=entry.score,
            )
        )
        taken += 1
        summary.corrections += 1
    return out


@dataclass(frozen=True)
class CorrectorRecord:
    """Serialized corrector training instance, self-contained for training."""

    source_id: str
    question: str
    context: str
    marked_span: CharSpan
    target_span: CharSpan
    is_identity: bool


def write_corrector_file(
    path: str | Path,
    examples_by_id: dict[str, MRCExample],
    corrector_examples: list[CorrectorExample],
) -> None:
    """One JSON object per line with character offsets.

    Records are sorted by (source id, identity first, score desc) so output
    bytes do not depend on construction order.
    """
    ordered = sorted(
        corrector_examples,
        key=lambda ce: (ce.source_example_id, not ce.is_identity, -ce.source_score),
    )
    with open(path, "w", encoding="utf-8") as f:
        for ce in ordered:
            src = examples_by_id[ce.source_example_id]
            record = {
                "source_id": ce.source_example_id,
                "question": src.question,
                "context": src.context,
                "marked_start": ce.marked_span.start,
                "marked_end": ce.marked_span.end,
                "target_start": ce.target_span.start,
                "target_end": ce.target_span.end,
                "is_identity": ce.is_identity,
            }
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_corrector_file(path: str | Path) -> list[CorrectorRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            records.append(
                CorrectorRecord(
                    source_id=d["source_id"],
                    question=d["question"],
                    context=d["context"],
                    marked_span=CharSpan(d["marked_start"], d["marked_end"]),
                    target_span=CharSpan(d["target_start"], d["target_end"]),
                    is_identity=bool(d["is_identity"]),
                )
            )
    return records
