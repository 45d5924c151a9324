"""Training loop for the span extractor.

Batch composition is a pure function of (seed, epoch), the learning rate
follows a linear warmup / linear decay schedule, and all randomness flows
from explicit seeds, so identical inputs give bit-identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .datagen import CorrectorRecord
from .encoding import EncodedInput, MarkedSpanTruncated, encode, target_positions
from .spans import MRCExample
from .transformer import NEG_INF, ModelConfig, SpanExtractor, build_model
from .vocab import PAD, Vocab


@dataclass
class TrainConfig:
    epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.2
    warmup_fraction: float = 0.1
    seed: int = 0
    optimizer: str = "sgd"  # {sgd, adam}

    def __post_init__(self) -> None:
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size, and learning_rate must be positive")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError(f"warmup_fraction must be in [0, 1], got {self.warmup_fraction}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainingInstance:
    encoded: EncodedInput
    start_pos: int
    end_pos: int


@dataclass
class TrainStats:
    losses: list[float] = field(default_factory=list)
    rejected: int = 0
    truncated: int = 0


def build_reader_instances(
    examples: list[MRCExample], vocab: Vocab, config: ModelConfig
) -> tuple[list[TrainingInstance], TrainStats]:
    """Reader training targets are the first single-span annotation. Examples
    whose gold answers are all multi-span, or whose target does not survive
    truncation, are rejected with a count."""
    stats = TrainStats()
    instances = []
    for ex in examples:
        single = ex.single_span_annotations()
        if not single:
            stats.rejected += 1
            continue
        target = single[0].spans[0]
        encoded = encode(ex.question, ex.context, None, vocab, config.max_seq_len, config.max_query_len)
        if encoded.truncated:
            stats.truncated += 1
        try:
            s, e = target_positions(encoded, target)
        except MarkedSpanTruncated:
            stats.rejected += 1
            continue
        instances.append(TrainingInstance(encoded, s, e))
    return instances, stats


def build_corrector_instances(
    records: list[CorrectorRecord], vocab: Vocab, config: ModelConfig
) -> tuple[list[TrainingInstance], TrainStats]:
    """Corrector inputs mark the recorded span with delimiters; the target is
    the gold span."""
    stats = TrainStats()
    instances = []
    for rec in records:
        try:
            encoded = encode(
                rec.question, rec.context, rec.marked_span, vocab, config.max_seq_len, config.max_query_len
            )
            s, e = target_positions(encoded, rec.target_span)
        except (MarkedSpanTruncated, ValueError):
            stats.rejected += 1
            continue
        if encoded.truncated:
            stats.truncated += 1
        instances.append(TrainingInstance(encoded, s, e))
    return instances, stats


def collate(
    instances: list[TrainingInstance], with_targets: bool = True
) -> dict[str, torch.Tensor]:
    """Pad a batch to its longest sequence."""
    max_len = max(len(inst.encoded) for inst in instances)
    b = len(instances)
    token_ids = torch.full((b, max_len), PAD, dtype=torch.long)
    segment_ids = torch.zeros((b, max_len), dtype=torch.long)
    key_mask = torch.zeros((b, max_len), dtype=torch.bool)
    valid_mask = torch.zeros((b, max_len), dtype=torch.bool)
    for i, inst in enumerate(instances):
        l = len(inst.encoded)
        token_ids[i, :l] = torch.tensor(inst.encoded.token_ids, dtype=torch.long)
        segment_ids[i, :l] = torch.tensor(inst.encoded.segment_ids, dtype=torch.long)
        key_mask[i, :l] = True
        valid_mask[i, :l] = torch.tensor(inst.encoded.valid_mask, dtype=torch.bool)
    batch = {
        "token_ids": token_ids,
        "segment_ids": segment_ids,
        "key_mask": key_mask,
        "valid_mask": valid_mask,
    }
    if with_targets:
        batch["starts"] = torch.tensor([inst.start_pos for inst in instances], dtype=torch.long)
        batch["ends"] = torch.tensor([inst.end_pos for inst in instances], dtype=torch.long)
    return batch


def span_loss(
    start_logits: torch.Tensor,
    end_logits: torch.Tensor,
    valid_mask: torch.Tensor,
    starts: torch.Tensor,
    ends: torch.Tensor,
) -> torch.Tensor:
    """Mean of start and end cross-entropy, restricted to valid positions."""
    bias = torch.where(valid_mask, 0.0, NEG_INF).to(start_logits.dtype)
    start_lp = torch.log_softmax(start_logits + bias, dim=-1)
    end_lp = torch.log_softmax(end_logits + bias, dim=-1)
    start_nll = -start_lp.gather(1, starts.unsqueeze(1)).squeeze(1)
    end_nll = -end_lp.gather(1, ends.unsqueeze(1)).squeeze(1)
    return 0.5 * (start_nll.mean() + end_nll.mean())


def _lr_multiplier(step: int, total_steps: int, warmup_fraction: float) -> float:
    warmup = int(round(warmup_fraction * total_steps))
    if step < warmup:
        return (step + 1) / warmup
    if total_steps == warmup:
        return 1.0
    return max(0.0, (total_steps - step) / (total_steps - warmup))


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    """Shuffled index order for one epoch; a pure function of (seed, epoch)."""
    return np.random.default_rng((seed, epoch)).permutation(n)


def train(
    instances: list[TrainingInstance],
    model_config: ModelConfig,
    train_config: TrainConfig,
    vocab_size: int,
    model: SpanExtractor | None = None,
) -> tuple[SpanExtractor, TrainStats]:
    """Train a span extractor from scratch (or continue from ``model``)."""
    if not instances:
        raise ValueError("no training instances")
    if model is None:
        model = build_model(model_config, vocab_size)
    stats = TrainStats()
    if train_config.optimizer == "adam":
        opt = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate)
    else:
        opt = torch.optim.SGD(model.parameters(), lr=train_config.learning_rate)
    n = len(instances)
    steps_per_epoch = (n + train_config.batch_size - 1) // train_config.batch_size
    total_steps = steps_per_epoch * train_config.epochs
    model.rng.manual_seed(train_config.seed)  # dropout stream
    model.train()
    step = 0
    for epoch in range(train_config.epochs):
        order = epoch_order(n, train_config.seed, epoch)
        for b in range(steps_per_epoch):
            idx = order[b * train_config.batch_size : (b + 1) * train_config.batch_size]
            batch = collate([instances[int(i)] for i in idx])
            lr = train_config.learning_rate * _lr_multiplier(step, total_steps, train_config.warmup_fraction)
            for group in opt.param_groups:
                group["lr"] = lr
            opt.zero_grad()
            start_logits, end_logits, _ = model(
                batch["token_ids"], batch["segment_ids"], batch["key_mask"]
            )
            loss = span_loss(start_logits, end_logits, batch["valid_mask"], batch["starts"], batch["ends"])
            loss.backward()
            opt.step()
            stats.losses.append(float(loss.detach()))
            step += 1
    model.eval()
    return model, stats


def finite_difference_check(
    model: SpanExtractor,
    batch: dict[str, torch.Tensor],
    n_samples: int = 200,
    h: float = 1e-5,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """Compare analytic gradients of the span loss against central finite
    differences for a random sample of parameter entries.

    Returns (analytic, numeric) pairs. The model should be in float64 and
    built with dropout 0 for meaningful comparisons.
    """

    def loss_value() -> torch.Tensor:
        start_logits, end_logits, _ = model(
            batch["token_ids"], batch["segment_ids"], batch["key_mask"]
        )
        return span_loss(start_logits, end_logits, batch["valid_mask"], batch["starts"], batch["ends"])

    model.zero_grad()
    loss = loss_value()
    loss.backward()
    params = [p for p in model.parameters() if p.requires_grad]
    sizes = np.array([p.numel() for p in params])
    total = int(sizes.sum())
    rng = np.random.default_rng(seed)
    flat_indices = rng.choice(total, size=min(n_samples, total), replace=False)
    bounds = np.cumsum(sizes)
    pairs = []
    with torch.no_grad():
        for flat in sorted(int(i) for i in flat_indices):
            p_idx = int(np.searchsorted(bounds, flat, side="right"))
            offset = flat - (0 if p_idx == 0 else int(bounds[p_idx - 1]))
            param = params[p_idx]
            analytic = float(param.grad.view(-1)[offset])
            orig = float(param.view(-1)[offset])
            param.view(-1)[offset] = orig + h
            f_plus = float(loss_value())
            param.view(-1)[offset] = orig - h
            f_minus = float(loss_value())
            param.view(-1)[offset] = orig
            numeric = (f_plus - f_minus) / (2 * h)
            pairs.append((analytic, numeric))
    return pairs
