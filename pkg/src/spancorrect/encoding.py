"""Input encoding for the span extractor.

Layout is [CLS] question [SEP] context [SEP], with segment id 0 for the
question side and 1 for the context side. When a context span is marked, a
delimiter token is inserted immediately before and after the covering token
range. Only context tokens are valid answer positions; the offset table maps
each of them back to a character span of the original context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datagen import insert_delimiters
from .spans import CharSpan
from .vocab import CLS, DELIM, SEP, Token, Vocab, tokenize


class MarkedSpanTruncated(ValueError):
    """The marked span fell entirely outside the encoded context window."""


@dataclass
class EncodedInput:
    """Token ids with segment ids, per-position context offsets, and the
    valid-answer mask. ``offsets[i]`` is None at non-context positions."""

    token_ids: list[int]
    segment_ids: list[int]
    offsets: list[CharSpan | None]
    valid_mask: list[bool]
    context: str
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.token_ids)


def _covering_token_range(tokens: list[Token], span: CharSpan) -> tuple[int, int]:
    """Smallest half-open token interval covering the character span."""
    start = None
    end = None
    for i, tok in enumerate(tokens):
        if tok.span.end > span.start and tok.span.start < span.end:
            if start is None:
                start = i
            end = i + 1
    if start is None:
        raise MarkedSpanTruncated(
            f"marked span [{span.start}, {span.end}) covers no encoded context token"
        )
    return start, end


def encode(
    question: str,
    context: str,
    marked: CharSpan | None,
    vocab: Vocab,
    max_seq_len: int,
    max_query_len: int,
) -> EncodedInput:
    """Encode a question/context pair, optionally marking a context span with
    delimiter tokens.

    The question is truncated to ``max_query_len`` tokens and the context to
    whatever fits in ``max_seq_len`` after specials (and delimiters, when
    marking). A marked span is expanded to the smallest covering token range;
    if truncation removed all of its tokens, MarkedSpanTruncated is raised.
    """
    q_tokens = tokenize(question)[:max_query_len]
    c_tokens = tokenize(context)
    budget = max_seq_len - len(q_tokens) - 3 - (2 if marked is not None else 0)
    if budget < 1:
        raise ValueError(f"max_seq_len={max_seq_len} leaves no room for context tokens")
    truncated = len(c_tokens) > budget
    c_tokens = c_tokens[:budget]

    context_ids = [vocab.encode_token(t.text) for t in c_tokens]
    context_offsets: list[CharSpan | None] = [t.span for t in c_tokens]

    if marked is not None:
        t_start, t_end = _covering_token_range(c_tokens, marked)
        context_ids = insert_delimiters(context_ids, (t_start, t_end), DELIM)
        context_offsets = (
            context_offsets[:t_start] + [None] + context_offsets[t_start:t_end] + [None] + context_offsets[t_end:]
        )

    q_part = [CLS] + [vocab.encode_token(t.text) for t in q_tokens] + [SEP]
    token_ids = q_part + context_ids + [SEP]
    segment_ids = [0] * len(q_part) + [1] * (len(context_ids) + 1)
    offsets: list[CharSpan | None] = [None] * len(q_part) + context_offsets + [None]
    valid_mask = [off is not None for off in offsets]
    return EncodedInput(
        token_ids=token_ids,
        segment_ids=segment_ids,
        offsets=offsets,
        valid_mask=valid_mask,
        context=context,
        truncated=truncated,
    )


def target_positions(encoded: EncodedInput, target: CharSpan) -> tuple[int, int]:
    """Inclusive (start, end) token positions of the context tokens covering
    the target character span. Raises MarkedSpanTruncated if the target was
    truncated away."""
    start = None
    end = None
    for i, off in enumerate(encoded.offsets):
        if off is None:
            continue
        if off.end > target.start and off.start < target.end:
            if start is None:
                start = i
            end = i
    if start is None:
        raise MarkedSpanTruncated(
            f"target span [{target.start}, {target.end}) covers no encoded context token"
        )
    return start, end
