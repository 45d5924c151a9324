"""N-best span decoding, logit ensembling, and the correction step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .encoding import EncodedInput, MarkedSpanTruncated, encode
from .spans import CharSpan, MRCExample, NBestList, Prediction, SpanNotFound, locate
from .training import collate, TrainingInstance
from .transformer import ModelConfig, SpanExtractor
from .vocab import Vocab


@dataclass(frozen=True)
class SpanLogits:
    """Per-position start and end logits for one encoded input."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self) -> None:
        if self.start.shape != self.end.shape or self.start.ndim != 1:
            raise ValueError("start and end logits must be 1-d vectors of equal length")

    def __len__(self) -> int:
        return len(self.start)


def ensemble_logits(parts: list[SpanLogits]) -> SpanLogits:
    """Elementwise arithmetic mean of start vectors and of end vectors."""
    if not parts:
        raise ValueError("ensemble_logits requires at least one part")
    length = len(parts[0])
    if any(len(p) != length for p in parts):
        raise ValueError("all logit vectors must have the same length")
    start = np.mean([p.start for p in parts], axis=0)
    end = np.mean([p.end for p in parts], axis=0)
    return SpanLogits(start=start, end=end)


def decode_nbest(
    logits: SpanLogits,
    encoded: EncodedInput,
    n: int,
    max_answer_len: int,
    example_id: str = "",
) -> NBestList:
    """Top-n candidate spans by start-logit + end-logit.

    Candidates are position pairs (s, e) with s <= e, both endpoints in the
    valid-answer mask, and at most ``max_answer_len`` tokens long. Ties break
    toward the earlier start, then the shorter span. Returns an empty list
    when no position is valid.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    valid = [i for i, v in enumerate(encoded.valid_mask) if v]
    candidates = []
    for si, s in enumerate(valid):
        for e in valid[si:]:
            if e - s + 1 > max_answer_len:
                break
            candidates.append((float(logits.start[s] + logits.end[e]), s, e))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2] - c[1]))
    out: NBestList = []
    for score, s, e in candidates[:n]:
        span = CharSpan(encoded.offsets[s].start, encoded.offsets[e].end)
        out.append(
            Prediction(
                example_id=example_id,
                text=span.text(encoded.context),
                span=span,
                score=score,
            )
        )
    return out


def run_model(
    model: SpanExtractor, encoded_inputs: list[EncodedInput], batch_size: int = 32
) -> list[SpanLogits]:
    """Inference-mode logits for a list of encoded inputs."""
    model.eval()
    out: list[SpanLogits] = []
    with torch.no_grad():
        for i in range(0, len(encoded_inputs), batch_size):
            chunk = encoded_inputs[i : i + batch_size]
            instances = [TrainingInstance(enc, 0, 0) for enc in chunk]
            batch = collate(instances, with_targets=False)
            start_logits, end_logits, _ = model(
                batch["token_ids"], batch["segment_ids"], batch["key_mask"]
            )
            for j, enc in enumerate(chunk):
                l = len(enc)
                out.append(
                    SpanLogits(
                        start=start_logits[j, :l].numpy().astype(np.float64),
                        end=end_logits[j, :l].numpy().astype(np.float64),
                    )
                )
    return out


def predict_nbest(
    models: list[SpanExtractor],
    vocab: Vocab,
    examples: list[MRCExample],
    config: ModelConfig,
    n: int,
    marked_spans: dict[str, CharSpan] | None = None,
    batch_size: int = 32,
) -> dict[str, NBestList]:
    """N-best predictions for a dataset, optionally with marked input spans.

    With several models, their per-position logits are averaged before
    decoding (logit ensembling). Examples are processed in sorted-id order so
    output does not depend on input order.
    """
    ordered = sorted(examples, key=lambda ex: ex.id)
    encoded_list = []
    for ex in ordered:
        marked = marked_spans.get(ex.id) if marked_spans is not None else None
        encoded_list.append(
            encode(ex.question, ex.context, marked, vocab, config.max_seq_len, config.max_query_len)
        )
    per_model = [run_model(m, encoded_list, batch_size) for m in models]
    results: dict[str, NBestList] = {}
    for i, ex in enumerate(ordered):
        logits = ensemble_logits([pm[i] for pm in per_model])
        results[ex.id] = decode_nbest(logits, encoded_list[i], n, config.max_answer_len, example_id=ex.id)
    return results


def correct(
    reader_prediction: Prediction,
    example: MRCExample,
    corrector: SpanExtractor,
    vocab: Vocab,
    config: ModelConfig,
) -> Prediction:
    """Re-predict the answer span with the reader's span marked in the input.

    The reader prediction must carry a span or be locatable in the context;
    the corrector's top-1 decoded span becomes the final prediction.
    """
    span = reader_prediction.span
    if span is None:
        span = locate(reader_prediction.text, example.context)
    encoded = encode(example.question, example.context, span, vocab, config.max_seq_len, config.max_query_len)
    logits = run_model(corrector, [encoded])[0]
    nbest = decode_nbest(logits, encoded, 1, config.max_answer_len, example_id=example.id)
    if not nbest:
        raise ValueError(f"no valid span for example {example.id!r}")
    return nbest[0]


def correct_dataset(
    reader_preds: dict[str, Prediction],
    examples: list[MRCExample],
    corrector: SpanExtractor,
    vocab: Vocab,
    config: ModelConfig,
    batch_size: int = 32,
) -> tuple[dict[str, Prediction], int]:
    """Run the corrector over a full prediction file.

    Predictions whose span cannot be resolved or encoded are passed through
    unchanged; the count of such pass-throughs is returned.
    """
    by_id = {ex.id: ex for ex in examples}
    missing = sorted(set(reader_preds) - set(by_id))
    if missing:
        raise KeyError(f"predictions reference unknown example ids: {missing[:5]}")
    ordered_ids = sorted(reader_preds)
    encoded_list = []
    kept_ids = []
    passthrough = 0
    out: dict[str, Prediction] = {}
    for ex_id in ordered_ids:
        ex = by_id[ex_id]
        pred = reader_preds[ex_id]
        try:
            span = pred.span
            if span is None or span.end > len(ex.context) or span.text(ex.context) != pred.text:
                span = locate(pred.text, ex.context, hint=pred.span)
            encoded_list.append(
                encode(ex.question, ex.context, span, vocab, config.max_seq_len, config.max_query_len)
            )
            kept_ids.append(ex_id)
        except (SpanNotFound, MarkedSpanTruncated, ValueError):
            out[ex_id] = pred
            passthrough += 1
    logits_list = run_model(corrector, encoded_list, batch_size)
    for ex_id, encoded, logits in zip(kept_ids, encoded_list, logits_list):
        nbest = decode_nbest(logits, encoded, 1, config.max_answer_len, example_id=ex_id)
        if nbest:
            out[ex_id] = nbest[0]
        else:
            out[ex_id] = reader_preds[ex_id]
            passthrough += 1
    return out, passthrough
