"""A small transformer encoder with start/end span classification heads.

The same architecture serves as reader and corrector; the corrector differs
only in that its input carries delimiter tokens around a marked span. The
network is trained from scratch on desk-scale corpora: token, position, and
segment embeddings feed a pre-norm encoder stack, and a linear head produces
one start and one end logit per position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

NEG_INF = -1.0e4  # additive mask value; underflows to 0 under exp in float32


@dataclass
class ModelConfig:
    layers: int = 2
    heads: int = 2
    dim: int = 64
    ff_dim: int = 128
    max_seq_len: int = 256
    max_query_len: int = 30
    max_answer_len: int = 30
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim % self.heads != 0:
            raise ValueError(f"dim={self.dim} must be divisible by heads={self.heads}")
        for name in ("layers", "heads", "dim", "ff_dim", "max_seq_len", "max_query_len", "max_answer_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


class SeededDropout(nn.Module):
    """Dropout whose mask stream comes from an explicit per-model generator,
    so concurrent training of several models stays deterministic."""

    def __init__(self, p: float, rng: torch.Generator):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = 1.0 - self.p
        mask = (torch.rand(x.shape, generator=self.rng) < keep).to(x.dtype)
        return x * mask / keep


class MultiHeadSelfAttention(nn.Module):
    def __init__(self, dim: int, heads: int, dropout: float, rng: torch.Generator):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)
        self.dropout = SeededDropout(dropout, rng)

    def forward(
        self, x: torch.Tensor, key_mask: torch.Tensor, return_probs: bool = False
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        # x: [B, L, D]; key_mask: [B, L] bool, True at attendable positions
        b, l, _ = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        q = q.view(b, l, self.heads, self.head_dim).transpose(1, 2)
        k = k.view(b, l, self.heads, self.head_dim).transpose(1, 2)
        v = v.view(b, l, self.heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        scores = scores + torch.where(key_mask, 0.0, NEG_INF).to(scores.dtype)[:, None, None, :]
        probs = torch.softmax(scores, dim=-1)
        ctx = self.dropout(probs) @ v
        ctx = ctx.transpose(1, 2).reshape(b, l, -1)
        return self.out(ctx), (probs if return_probs else None)


class EncoderLayer(nn.Module):
    def __init__(self, dim: int, heads: int, ff_dim: int, dropout: float, rng: torch.Generator):
        super().__init__()
        self.attn = MultiHeadSelfAttention(dim, heads, dropout, rng)
        self.norm1 = nn.LayerNorm(dim)
        self.norm2 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(
            nn.Linear(dim, ff_dim),
            nn.GELU(),
            nn.Linear(ff_dim, dim),
        )
        self.dropout = SeededDropout(dropout, rng)

    def forward(
        self, x: torch.Tensor, key_mask: torch.Tensor, return_probs: bool = False
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        attn_out, probs = self.attn(self.norm1(x), key_mask, return_probs)
        x = x + self.dropout(attn_out)
        x = x + self.dropout(self.ff(self.norm2(x)))
        return x, probs


class SpanExtractor(nn.Module):
    """Pre-norm transformer encoder with a two-way span head."""

    def __init__(self, config: ModelConfig, vocab_size: int):
        super().__init__()
        self.config = config
        self.vocab_size = vocab_size
        # dropout mask stream; reseeded by the training loop
        self.rng = torch.Generator()
        self.rng.manual_seed(config.seed)
        self.token_emb = nn.Embedding(vocab_size, config.dim)
        self.pos_emb = nn.Embedding(config.max_seq_len, config.dim)
        self.seg_emb = nn.Embedding(2, config.dim)
        self.emb_norm = nn.LayerNorm(config.dim)
        self.emb_dropout = SeededDropout(config.dropout, self.rng)
        self.layers = nn.ModuleList(
            EncoderLayer(config.dim, config.heads, config.ff_dim, config.dropout, self.rng)
            for _ in range(config.layers)
        )
        self.final_norm = nn.LayerNorm(config.dim)
        self.span_head = nn.Linear(config.dim, 2)

    def forward(
        self,
        token_ids: torch.Tensor,
        segment_ids: torch.Tensor,
        key_mask: torch.Tensor,
        return_attention: bool = False,
    ) -> tuple[torch.Tensor, torch.Tensor, list[torch.Tensor]]:
        """Start and end logits per position, each [B, L].

        ``key_mask`` is True at real (non-padding) positions. Logits are
        produced at every position; answer-validity masking is the decoder's
        and the loss function's job.
        """
        b, l = token_ids.shape
        if l > self.config.max_seq_len:
            raise ValueError(f"sequence length {l} exceeds max_seq_len={self.config.max_seq_len}")
        positions = torch.arange(l, device=token_ids.device).unsqueeze(0).expand(b, l)
        x = self.token_emb(token_ids) + self.pos_emb(positions) + self.seg_emb(segment_ids)
        x = self.emb_dropout(self.emb_norm(x))
        attentions = []
        for layer in self.layers:
            x, probs = layer(x, key_mask, return_probs=return_attention)
            if return_attention:
                attentions.append(probs)
        x = self.final_norm(x)
        logits = self.span_head(x)
        return logits[..., 0], logits[..., 1], attentions


def build_model(config: ModelConfig, vocab_size: int) -> SpanExtractor:
    """Construct a model with parameters drawn deterministically from the
    config seed."""
    torch.manual_seed(config.seed)
    model = SpanExtractor(config, vocab_size)
    model.eval()
    return model
