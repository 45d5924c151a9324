"""Synthetic MRC corpus generator and a flawed-reader simulator.

The generator builds templated question/context pairs whose gold answers have
controllable structure: comma-separated lists, qualified entities, and plain
entities. The flawed reader deforms gold spans to inject the partial-match
error categories at configured rates and returns the injected category per
example, providing oracle labels for taxonomy and pipeline tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .spans import (
    Annotation,
    CharSpan,
    MRCExample,
    NBestList,
    Prediction,
    em_max,
    f1_max,
    relation,
    SpanRelation,
)
from .taxonomy import ErrorCategory, select_reference_annotation

TEMPLATE_LIST = "list"
TEMPLATE_QUALIFIED = "qualified"
TEMPLATE_ENTITY = "entity"

_TITLES = ("captain", "doctor", "sergeant", "professor", "minister", "warden", "colonel", "envoy")
_NAMES = (
    "mira", "elan", "sorin", "vala", "orin", "tessa", "bram", "lyra",
    "petra", "nadia", "felix", "iris", "marek", "sable", "quinn", "rufus",
    "wanda", "yusuf", "zelda", "ivo", "greta", "haldor", "juno", "kaspar",
)
_PLACES = ("amber", "northern", "silver", "eastern", "crimson", "hollow", "misty", "golden")
_UNITS = ("valley", "coast", "guild", "province", "harbor", "district", "plateau", "archive")
_ITEMS = (
    "willow", "falcon", "ember", "laurel", "quartz", "maple", "heron", "jasper",
    "violet", "cedar", "onyx", "rowan", "tulip", "garnet", "aspen", "coral",
)
_TOPICS = ("harvest", "archery", "pottery", "sailing", "chess", "weaving", "baking", "fencing", "rowing", "painting")
_FILLER_NOUNS = ("lantern", "bridge", "orchard", "mill", "tower", "market", "garden", "stable", "library", "fountain")
_FILLER_ADJS = ("quiet", "busy", "dusty", "bright", "calm", "crowded", "foggy", "warm")
_FILLER_SEASONS = ("spring", "summer", "autumn", "winter", "thaw", "drought")


@dataclass
class SynthConfig:
    n_examples: int = 2000
    seed: int = 0
    # Relative template mix weights.
    weight_list: float = 1.0
    weight_qualified: float = 1.0
    weight_entity: float = 1.0
    # Fraction of list-template examples annotated as multi-span (the items
    # as separate gold spans, alongside the contiguous full-list annotation).
    multi_span_list_fraction: float = 0.5
    # Total filler tokens per context, split before/after the answer sentence.
    filler_tokens_range: tuple[int, int] = (10, 30)
    id_prefix: str = "synth"
    entities: tuple[str, ...] = _TITLES
    entity_names: tuple[str, ...] = _NAMES
    qualifier_places: tuple[str, ...] = _PLACES
    qualifier_units: tuple[str, ...] = _UNITS
    list_items: tuple[str, ...] = _ITEMS
    topics: tuple[str, ...] = _TOPICS

    def __post_init__(self) -> None:
        weights = (self.weight_list, self.weight_qualified, self.weight_entity)
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("template weights must be non-negative with a positive sum")
        if not 0.0 <= self.multi_span_list_fraction <= 1.0:
            raise ValueError("multi_span_list_fraction must be in [0, 1]")
        lo, hi = self.filler_tokens_range
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid filler token range ({lo}, {hi})")
        for name in ("entities", "entity_names", "qualifier_places", "qualifier_units", "list_items", "topics"):
            if not getattr(self, name):
                raise ValueError(f"vocabulary pool {name!r} is empty")


def _template_sequence(config: SynthConfig, rng: np.random.Generator) -> list[str]:
    """Largest-remainder allocation of templates by weight, then a seeded
    shuffle, so empirical frequencies track the weights exactly."""
    weights = {
        TEMPLATE_LIST: config.weight_list,
        TEMPLATE_QUALIFIED: config.weight_qualified,
        TEMPLATE_ENTITY: config.weight_entity,
    }
    total_w = sum(weights.values())
    n = config.n_examples
    quotas = {t: n * w / total_w for t, w in weights.items()}
    counts = {t: int(q) for t, q in quotas.items()}
    remainder = n - sum(counts.values())
    by_frac = sorted(weights, key=lambda t: (-(quotas[t] - counts[t]), t))
    for t in by_frac[:remainder]:
        counts[t] += 1
    seq = [t for t in (TEMPLATE_LIST, TEMPLATE_QUALIFIED, TEMPLATE_ENTITY) for _ in range(counts[t])]
    return [seq[int(i)] for i in rng.permutation(n)]


def _filler_sentence(rng: np.random.Generator) -> str:
    n1, n2 = rng.choice(_FILLER_NOUNS), rng.choice(_FILLER_NOUNS)
    adj = rng.choice(_FILLER_ADJS)
    season = rng.choice(_FILLER_SEASONS)
    return f"the {n1} near the {n2} stayed {adj} through the {season} ."


def _filler_block(rng: np.random.Generator, token_budget: int) -> str:
    sentences = []
    used = 0
    while used + 10 <= token_budget:
        s = _filler_sentence(rng)
        sentences.append(s)
        used += len(s.split())
    return " ".join(sentences)


@dataclass
class _Built:
    question: str
    context: str
    annotations: tuple[Annotation, ...]


def _build_example(template: str, multi_span: bool, config: SynthConfig, rng: np.random.Generator) -> _Built:
    topic = str(rng.choice(config.topics))
    lo, hi = config.filler_tokens_range
    total_filler = int(rng.integers(lo, hi + 1))
    before_budget = int(rng.integers(0, total_filler + 1))
    before = _filler_block(rng, before_budget)
    after = _filler_block(rng, total_filler - before_budget)

    if template == TEMPLATE_LIST:
        items = [str(x) for x in rng.choice(config.list_items, size=3, replace=False)]
        question = f"who were the {topic} winners"
        lead = f"the {topic} winners were "
        answer_text = f"{items[0]} , {items[1]} and {items[2]}"
    elif template == TEMPLATE_QUALIFIED:
        entity = f"{rng.choice(config.entities)} {rng.choice(config.entity_names)}"
        qualifier = f"of the {rng.choice(config.qualifier_places)} {rng.choice(config.qualifier_units)}"
        question = f"who exactly received the {topic} medal"
        lead = f"the {topic} medal went to "
        answer_text = f"{entity} {qualifier}"
    elif template == TEMPLATE_ENTITY:
        entity = f"{rng.choice(config.entities)} {rng.choice(config.entity_names)}"
        question = f"who received the {topic} medal"
        lead = f"the {topic} medal went to "
        answer_text = entity
    else:
        raise ValueError(f"unknown template {template!r}")

    prefix = (before + " " if before else "") + lead
    answer_start = len(prefix)
    context = prefix + answer_text + " that year ." + (" " + after if after else "")
    contiguous = Annotation.from_context(
        context, [CharSpan(answer_start, answer_start + len(answer_text))]
    )
    if template == TEMPLATE_LIST and multi_span:
        # Items are separated by " , " and " and "; recover their offsets.
        item_spans = []
        pos = 0
        for piece in items:
            at = answer_text.index(piece, pos)
            item_spans.append(CharSpan(answer_start + at, answer_start + at + len(piece)))
            pos = at + len(piece)
        multi = Annotation.from_context(context, item_spans)
        return _Built(question, context, (multi, contiguous))
    return _Built(question, context, (contiguous,))


def gen_corpus(config: SynthConfig) -> tuple[list[MRCExample], dict[str, dict]]:
    """Generate a corpus plus a sidecar of template labels per example id."""
    template_rng = np.random.default_rng((config.seed, 0))
    templates = _template_sequence(config, template_rng)
    examples = []
    labels: dict[str, dict] = {}
    width = max(5, len(str(config.n_examples)))
    for i, template in enumerate(templates):
        rng = np.random.default_rng((config.seed, 1, i))
        multi = bool(template == TEMPLATE_LIST and rng.random() < config.multi_span_list_fraction)
        built = _build_example(template, multi, config, rng)
        ex_id = f"{config.id_prefix}-{i:0{width}d}"
        examples.append(
            MRCExample(
                id=ex_id,
                question=built.question,
                context=built.context,
                ground_truths=built.annotations,
            )
        )
        labels[ex_id] = {"template": template, "multi_span": multi}
    return examples, labels


@dataclass
class ErrorInjectionConfig:
    partial_match_rate: float = 0.4
    # Conditional category rates for injected examples; must sum to 1.
    rate_pred_subset_gt: float = 0.33
    rate_gt_subset_pred: float = 0.28
    rate_partial_overlap: float = 0.06
    rate_multi_span_gt: float = 0.33
    seed: int = 0
    nbest_extras: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.partial_match_rate <= 1.0:
            raise ValueError("partial_match_rate must be in [0, 1]")
        rates = self.category_rates()
        if any(r < 0 for r in rates.values()):
            raise ValueError("category rates must be non-negative")
        if abs(sum(rates.values()) - 1.0) > 1e-9:
            raise ValueError(f"category rates must sum to 1, got {sum(rates.values())}")

    def category_rates(self) -> dict[ErrorCategory, float]:
        return {
            ErrorCategory.PRED_SUBSET_GT: self.rate_pred_subset_gt,
            ErrorCategory.GT_SUBSET_PRED: self.rate_gt_subset_pred,
            ErrorCategory.PARTIAL_OVERLAP: self.rate_partial_overlap,
            ErrorCategory.MULTI_SPAN_GT: self.rate_multi_span_gt,
        }


@dataclass
class FlawedReaderOutput:
    predictions: dict[str, Prediction]
    nbest: dict[str, NBestList]
    labels: dict[str, str]  # example id -> category value, or "exact"
    summary: dict[str, int] = field(default_factory=dict)


_WS_TOKEN_RE = re.compile(r"\S+")


def _ws_tokens(context: str) -> list[CharSpan]:
    return [CharSpan(m.start(), m.end()) for m in _WS_TOKEN_RE.finditer(context)]


def _covering_ws_range(tokens: list[CharSpan], span: CharSpan) -> tuple[int, int]:
    """Inclusive whitespace-token range overlapping the char span."""
    first = last = None
    for i, tok in enumerate(tokens):
        if tok.end > span.start and tok.start < span.end:
            if first is None:
                first = i
            last = i
    if first is None:
        raise ValueError("span covers no whitespace token")
    return first, last


def _verified(
    pred_span: CharSpan,
    intended: ErrorCategory,
    example: MRCExample,
    ref: Annotation,
) -> bool:
    """Check that the deformed span is a true partial match that the
    taxonomy will classify as intended."""
    text = pred_span.text(example.context)
    if em_max(text, example.ground_truths) != 0:
        return False
    if f1_max(text, example.ground_truths) <= 0.0:
        return False
    probe = Prediction(example_id=example.id, text=text, span=pred_span)
    if select_reference_annotation(probe, example.ground_truths) is not ref:
        return False
    if intended is ErrorCategory.MULTI_SPAN_GT:
        return ref.is_multi_span
    rel = relation(pred_span, ref.spans[0])
    expected = {
        ErrorCategory.PRED_SUBSET_GT: SpanRelation.B_CONTAINS_A,
        ErrorCategory.GT_SUBSET_PRED: SpanRelation.A_CONTAINS_B,
        ErrorCategory.PARTIAL_OVERLAP: SpanRelation.OVERLAP,
    }[intended]
    return rel is expected


def _deform(
    category: ErrorCategory,
    example: MRCExample,
    rng: np.random.Generator,
    max_attempts: int = 12,
) -> CharSpan | None:
    """Deform the gold span into the given category on whitespace-token
    boundaries; None when the category is unsatisfiable for this example."""
    multi_anns = [a for a in example.ground_truths if a.is_multi_span]
    single_anns = [a for a in example.ground_truths if not a.is_multi_span]

    if category is ErrorCategory.MULTI_SPAN_GT:
        if not multi_anns:
            return None
        ref = multi_anns[0]
        for _ in range(max_attempts):
            member = ref.spans[int(rng.integers(len(ref.spans)))]
            if _verified(member, category, example, ref):
                return member
        return None

    # Single-span deformations are reliable only when the closest annotation
    # is unambiguous, so they are disabled on examples with multi-span gold.
    if not single_anns or multi_anns:
        return None
    ref = single_anns[0]
    gt = ref.spans[0]
    tokens = _ws_tokens(example.context)
    a, b = _covering_ws_range(tokens, gt)
    m = b - a + 1
    n = len(tokens)
    for _ in range(max_attempts):
        if category is ErrorCategory.PRED_SUBSET_GT:
            if m < 2:
                return None
            d = int(rng.integers(1, m))
            if rng.random() < 0.5:
                cand = CharSpan(tokens[a].start, tokens[b - d].end)
            else:
                cand = CharSpan(tokens[a + d].start, tokens[b].end)
        elif category is ErrorCategory.GT_SUBSET_PRED:
            left = int(rng.integers(0, min(3, a) + 1))
            right = int(rng.integers(0, min(3, n - 1 - b) + 1))
            if left == 0 and right == 0:
                continue
            cand = CharSpan(tokens[a - left].start, tokens[b + right].end)
        elif category is ErrorCategory.PARTIAL_OVERLAP:
            if m < 2:
                return None
            d = int(rng.integers(1, m))
            if rng.random() < 0.5 and b + 1 <= n - 1:
                ext = int(rng.integers(1, min(3, n - 1 - b) + 1))
                cand = CharSpan(tokens[a + d].start, tokens[b + ext].end)
            elif a >= 1:
                ext = int(rng.integers(1, min(3, a) + 1))
                cand = CharSpan(tokens[a - ext].start, tokens[b - d].end)
            else:
                continue
        else:
            raise ValueError(f"cannot deform into {category}")
        if _verified(cand, category, example, ref):
            return cand
    return None


def _wrong_candidates(
    example: MRCExample, rng: np.random.Generator, count: int, exclude: set[tuple[int, int]]
) -> list[CharSpan]:
    """Additional incorrect spans for the lower n-best entries."""
    cats = [
        ErrorCategory.PRED_SUBSET_GT,
        ErrorCategory.GT_SUBSET_PRED,
        ErrorCategory.PARTIAL_OVERLAP,
        ErrorCategory.MULTI_SPAN_GT,
    ]
    out: list[CharSpan] = []
    for _ in range(count * 8):
        if len(out) >= count:
            break
        cat = cats[int(rng.integers(len(cats)))]
        span = _deform(cat, example, rng, max_attempts=3)
        if span is None and cat is not ErrorCategory.MULTI_SPAN_GT:
            # Extras do not need taxonomy agreement; fall back to a
            # multi-span member deformation when available.
            span = _deform(ErrorCategory.MULTI_SPAN_GT, example, rng, max_attempts=3)
        if span is None:
            continue
        key = (span.start, span.end)
        if key in exclude:
            continue
        exclude.add(key)
        out.append(span)
    return out


def flawed_reader(examples: list[MRCExample], config: ErrorInjectionConfig) -> FlawedReaderOutput:
    """Simulate a reader with a controlled partial-match error profile.

    Each example independently keeps the gold span with probability
    (1 - partial_match_rate); otherwise a category is sampled from the
    configured rates and the gold span is deformed accordingly, resampling
    the category when it is unsatisfiable for the example. The top-1 n-best
    entry is the emitted prediction; lower entries are further incorrect
    deformations. Returned labels map each id to the injected category value
    or "exact".
    """
    rates = config.category_rates()
    cats = list(rates)
    probs = np.array([rates[c] for c in cats])
    probs = probs / probs.sum()
    predictions: dict[str, Prediction] = {}
    nbest: dict[str, NBestList] = {}
    labels: dict[str, str] = {}
    summary = {
        "examples": len(examples),
        "injected": 0,
        "exact": 0,
        "category_resamples": 0,
        "injection_fallbacks": 0,
    }
    for i, ex in enumerate(examples):
        rng = np.random.default_rng((config.seed, 2, i))
        single = ex.single_span_annotations()
        label = "exact"
        top_span: CharSpan | None = None
        if rng.random() < config.partial_match_rate:
            for _ in range(24):
                cat = cats[int(rng.choice(len(cats), p=probs))]
                span = _deform(cat, ex, rng)
                if span is not None:
                    top_span = span
                    label = cat.value
                    summary["injected"] += 1
                    break
                summary["category_resamples"] += 1
            else:
                summary["injection_fallbacks"] += 1
        if top_span is None:
            if not single:
                # No single gold span exists to emit verbatim; fall back to
                # the first member of the multi-span annotation.
                multi = next(a for a in ex.ground_truths if a.is_multi_span)
                top_span = multi.spans[0]
                label = ErrorCategory.MULTI_SPAN_GT.value
                summary["injected"] += 1
            else:
                top_span = single[0].spans[0]
                summary["exact"] += 1
        labels[ex.id] = label
        seen = {(top_span.start, top_span.end)}
        extras = _wrong_candidates(ex, rng, config.nbest_extras, seen)
        entries = [top_span] + extras
        nb = [
            Prediction(
                example_id=ex.id,
                text=span.text(ex.context),
                span=span,
                score=float(len(entries) - rank),
            )
            for rank, span in enumerate(entries)
        ]
        nbest[ex.id] = nb
        predictions[ex.id] = nb[0]
    return FlawedReaderOutput(predictions=predictions, nbest=nbest, labels=labels, summary=summary)
