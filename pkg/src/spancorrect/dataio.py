"""Dataset and prediction file formats.

Datasets use a SQuAD-style JSON layout; character offsets count characters.
A qa entry lists its single-span gold answers under "answers" and may carry
one multi-span gold annotation as a "spans" list of [start, end) intervals.
Prediction and n-best files map example ids to span entries. All writers
produce byte-identical output for identical inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .spans import Annotation, CharSpan, MRCExample, NBestList, Prediction

DATASET_VERSION = "1.0"


class DataFormatError(ValueError):
    """A data file does not satisfy the documented schema."""


def dump_json(obj, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, sort_keys=True, indent=1)
        f.write("\n")


def load_json(path: str | Path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_dataset(path: str | Path, examples: list[MRCExample]) -> None:
    paragraphs = []
    for ex in examples:
        answers = []
        multi_spans = None
        for ann in ex.ground_truths:
            if ann.is_multi_span:
                if multi_spans is not None:
                    raise DataFormatError(
                        f"example {ex.id!r}: the dataset format carries at most one "
                        "multi-span annotation per question"
                    )
                multi_spans = [[s.start, s.end] for s in ann.spans]
            else:
                answers.append({"text": ann.texts[0], "answer_start": ann.spans[0].start})
        qa = {"id": ex.id, "question": ex.question, "answers": answers}
        if multi_spans is not None:
            qa["spans"] = multi_spans
        paragraphs.append({"context": ex.context, "qas": [qa]})
    dump_json({"version": DATASET_VERSION, "data": [{"paragraphs": paragraphs}]}, path)


def read_dataset(path: str | Path) -> list[MRCExample]:
    obj = load_json(path)
    try:
        articles = obj["data"]
    except (TypeError, KeyError) as e:
        raise DataFormatError(f"{path}: missing top-level 'data' list") from e
    examples = []
    seen_ids = set()
    for article in articles:
        for para in article["paragraphs"]:
            context = para["context"]
            for qa in para["qas"]:
                ex_id = qa["id"]
                if ex_id in seen_ids:
                    raise DataFormatError(f"{path}: duplicate example id {ex_id!r}")
                seen_ids.add(ex_id)
                annotations: list[Annotation] = []
                if "spans" in qa:
                    try:
                        spans = [CharSpan(int(s), int(e)) for s, e in qa["spans"]]
                        annotations.append(Annotation.from_context(context, spans))
                    except ValueError as e:
                        raise DataFormatError(f"{path}: bad multi-span entry for {ex_id!r}: {e}") from e
                for ans in qa["answers"]:
                    start = int(ans["answer_start"])
                    text = ans["text"]
                    span = CharSpan(start, start + len(text))
                    if context[span.start : span.end] != text:
                        raise DataFormatError(
                            f"{path}: answer text for {ex_id!r} does not match context at offset {start}"
                        )
                    annotations.append(Annotation(spans=(span,), texts=(text,)))
                if not annotations:
                    raise DataFormatError(f"{path}: example {ex_id!r} has no answers")
                try:
                    examples.append(
                        MRCExample(
                            id=ex_id,
                            question=qa["question"],
                            context=context,
                            ground_truths=tuple(annotations),
                        )
                    )
                except ValueError as e:
                    raise DataFormatError(f"{path}: invalid example {ex_id!r}: {e}") from e
    return examples


def _prediction_entry(pred: Prediction) -> dict:
    return {
        "text": pred.text,
        "start": pred.span.start if pred.span is not None else None,
        "end": pred.span.end if pred.span is not None else None,
        "score": pred.score,
    }


def _parse_prediction(ex_id: str, entry: dict, path) -> Prediction:
    try:
        span = None
        if entry.get("start") is not None and entry.get("end") is not None:
            span = CharSpan(int(entry["start"]), int(entry["end"]))
        return Prediction(
            example_id=ex_id,
            text=entry["text"],
            span=span,
            score=float(entry.get("score", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"{path}: bad prediction entry for {ex_id!r}: {e}") from e


def write_predictions(path: str | Path, predictions: dict[str, Prediction]) -> None:
    dump_json({ex_id: _prediction_entry(p) for ex_id, p in predictions.items()}, path)


def read_predictions(path: str | Path) -> dict[str, Prediction]:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise DataFormatError(f"{path}: prediction file must be a JSON object")
    return {ex_id: _parse_prediction(ex_id, entry, path) for ex_id, entry in obj.items()}


def write_nbest(path: str | Path, nbest: dict[str, NBestList]) -> None:
    dump_json({ex_id: [_prediction_entry(p) for p in entries] for ex_id, entries in nbest.items()}, path)


def read_nbest(path: str | Path) -> dict[str, NBestList]:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise DataFormatError(f"{path}: n-best file must be a JSON object")
    out: dict[str, NBestList] = {}
    for ex_id, entries in obj.items():
        parsed = [_parse_prediction(ex_id, e, path) for e in entries]
        for prev, cur in zip(parsed, parsed[1:]):
            if cur.score > prev.score:
                raise DataFormatError(f"{path}: n-best entries for {ex_id!r} are not score-sorted")
        out[ex_id] = parsed
    return out


def write_labels(path: str | Path, labels: dict) -> None:
    dump_json(labels, path)


def read_labels(path: str | Path) -> dict:
    return load_json(path)
