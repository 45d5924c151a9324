"""Answer span correction for extractive reading comprehension."""

from .spans import (
    Annotation,
    CharSpan,
    MRCExample,
    NBestList,
    Prediction,
    SpanNotFound,
    SpanRelation,
    em_max,
    exact_match,
    f1_max,
    locate,
    normalize_text,
    relation,
    token_f1,
)
from .taxonomy import (
    ErrorCategory,
    TaxonomyReport,
    classify,
    distribution,
    is_partial_match,
    select_reference_annotation,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "CharSpan",
    "ErrorCategory",
    "MRCExample",
    "NBestList",
    "Prediction",
    "SpanNotFound",
    "SpanRelation",
    "TaxonomyReport",
    "classify",
    "distribution",
    "em_max",
    "exact_match",
    "f1_max",
    "is_partial_match",
    "locate",
    "normalize_text",
    "relation",
    "select_reference_annotation",
    "token_f1",
]
