"""Paired Fisher randomization test on per-example score vectors.

The observed statistic is the difference of means between two systems over
aligned examples. Under the null hypothesis, each example's pair of scores is
exchangeable, so every pattern of per-example swaps is equally likely; the
two-sided p-value is the fraction of swap patterns whose statistic is at
least as extreme as the observed one. Small problems are enumerated
exhaustively; larger ones fall back to seeded Monte Carlo sampling with an
add-one convention (the observed assignment counts), so p is never zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absorbs float round-off when comparing recomputed statistics against the
# observed one; exact ties (including the identity pattern) must count.
_TIE_EPS = 1e-12

_CHUNK = 1 << 15


@dataclass(frozen=True)
class PairedScores:
    """Aligned per-example scores of two systems."""

    ids: tuple[str, ...]
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if len(self.a) != len(self.b) or len(self.a) != len(self.ids):
            raise ValueError("ids, a, and b must have equal lengths")
        if len(self.a) == 0:
            raise ValueError("paired score vectors must be non-empty")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("example ids must be unique")

    @classmethod
    def from_dicts(cls, a: dict[str, float], b: dict[str, float]) -> "PairedScores":
        if set(a) != set(b):
            raise ValueError("score dicts must cover the same example ids")
        ids = tuple(sorted(a))
        return cls(
            ids=ids,
            a=np.array([a[i] for i in ids], dtype=np.float64),
            b=np.array([b[i] for i in ids], dtype=np.float64),
        )


@dataclass(frozen=True)
class SigTestResult:
    n: int
    statistic: float
    p_value: float
    method: str  # {exhaustive, monte_carlo}
    resamples: int | None
    seed: int | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "statistic": self.statistic,
            "p": self.p_value,
            "method": self.method,
            "resamples": self.resamples,
            "seed": self.seed,
        }


def _exhaustive_p(diffs: np.ndarray, n: int, observed: float) -> float:
    """Exact p over all swap patterns.

    Tied pairs (zero difference) are invariant under swapping, so only the
    non-zero differences are enumerated; the tied patterns multiply numerator
    and denominator equally and cancel.
    """
    nz = diffs[diffs != 0.0]
    m = len(nz)
    threshold = abs(observed) - _TIE_EPS
    total = 1 << m
    count = 0
    bits = np.arange(m)
    for lo in range(0, total, _CHUNK):
        patterns = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((patterns[:, None] >> bits) & 1)
        stats = (signs @ nz) / n
        count += int(np.count_nonzero(np.abs(stats) >= threshold))
    return count / total


def _monte_carlo_p(
    diffs: np.ndarray, n: int, observed: float, resamples: int, seed: int
) -> float:
    rng = np.random.default_rng(seed)
    threshold = abs(observed) - _TIE_EPS
    count = 0
    done = 0
    while done < resamples:
        take = min(_CHUNK, resamples - done)
        signs = np.where(rng.random((take, len(diffs))) < 0.5, -1.0, 1.0)
        stats = (signs @ diffs) / n
        count += int(np.count_nonzero(np.abs(stats) >= threshold))
        done += take
    return (1 + count) / (1 + resamples)


def fisher_randomization(
    scores: PairedScores,
    resamples: int = 10000,
    seed: int = 0,
    exhaustive_limit: int = 20,
) -> SigTestResult:
    """Two-sided paired randomization test of mean(a) - mean(b).

    All 2^n swap patterns are enumerated when n <= exhaustive_limit;
    otherwise ``resamples`` Monte Carlo draws are taken under ``seed``.
    """
    if resamples < 1:
        raise ValueError(f"resamples must be >= 1, got {resamples}")
    diffs = scores.a - scores.b
    n = len(diffs)
    observed = float(diffs.sum() / n)
    if n <= exhaustive_limit:
        p = _exhaustive_p(diffs, n, observed)
        return SigTestResult(n=n, statistic=observed, p_value=p, method="exhaustive", resamples=None, seed=None)
    p = _monte_carlo_p(diffs, n, observed, resamples, seed)
    return SigTestResult(n=n, statistic=observed, p_value=p, method="monte_carlo", resamples=resamples, seed=seed)
