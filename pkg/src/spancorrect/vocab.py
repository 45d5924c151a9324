"""Corpus vocabulary with reserved special tokens and offset-preserving
tokenization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from collections import Counter
from typing import Iterable

from .spans import CharSpan, MRCExample

PAD, UNK, CLS, SEP, DELIM = 0, 1, 2, 3, 4

# Special token strings use angle brackets, which the tokenizer splits into
# separate characters, so corpus tokenization can never produce them.
SPECIAL_TOKENS = ("<pad>", "<unk>", "<cls>", "<sep>", "<td>")

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class Token:
    text: str
    span: CharSpan


def tokenize(text: str) -> list[Token]:
    """Lowercased word/punctuation tokens with character offsets."""
    return [
        Token(m.group().lower(), CharSpan(m.start(), m.end()))
        for m in _TOKEN_RE.finditer(text)
    ]


class Vocab:
    """Token-to-id map with contiguous ids; specials occupy the low ids."""

    def __init__(self, tokens: list[str]):
        if list(tokens[: len(SPECIAL_TOKENS)]) != list(SPECIAL_TOKENS):
            raise ValueError("vocabulary must start with the special tokens")
        self.id_to_token = list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode_token(self, token: str) -> int:
        return self.token_to_id.get(token, UNK)

    def to_dict(self) -> dict:
        return {"tokens": self.id_to_token}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        return cls(d["tokens"])


def build_vocab(corpus: Iterable[MRCExample], min_count: int = 1) -> Vocab:
    """Count tokens over questions and contexts; tokens below ``min_count``
    fall back to UNK. Ids are assigned by (count desc, token lexicographic)."""
    counts: Counter[str] = Counter()
    n = 0
    for example in corpus:
        n += 1
        for tok in tokenize(example.question):
            counts[tok.text] += 1
        for tok in tokenize(example.context):
            counts[tok.text] += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    return Vocab(list(SPECIAL_TOKENS) + kept)


def build_vocab_from_texts(texts: Iterable[str], min_count: int = 1) -> Vocab:
    """Vocabulary from raw strings; used for corrector training files."""
    counts: Counter[str] = Counter()
    n = 0
    for text in texts:
        n += 1
        for tok in tokenize(text):
            counts[tok.text] += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    return Vocab(list(SPECIAL_TOKENS) + kept)
