"""Kruskal-Wallis omnibus test and Dunn post-hoc comparisons (Bonferroni).

Tail probabilities are computed here rather than pulled from a statistics
package: the chi-square upper tail through the regularised incomplete gamma
function, the normal tail through ``math.erfc``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import InvalidParams
from .core import average_ranks

_EPS = 1e-16
_MAX_ITER = 10_000
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """Lower regularised gamma P(a, x) by its power series (good for x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Upper regularised gamma Q(a, x) by Lentz's continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularised upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise InvalidParams(f"gamma shape must be positive, got {a}")
    if x < 0:
        raise InvalidParams(f"gamma argument must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return _gamma_continued_fraction(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution with ``df`` degrees of freedom."""
    if x <= 0:
        return 1.0
    return gammaincc(df / 2.0, x / 2.0)


def norm_two_sided(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


@dataclass(frozen=True)
class GroupedSample:
    groups: tuple  # of (label, tuple of floats)

    def __post_init__(self):
        groups = tuple((str(lbl), tuple(float(v) for v in vals)) for lbl, vals in self.groups)
        object.__setattr__(self, "groups", groups)
        if len(groups) < 2:
            raise InvalidParams("need at least 2 groups")
        if any(len(v) == 0 for _, v in groups):
            raise InvalidParams("every group must be non-empty")
        if sum(len(v) for _, v in groups) < 3:
            raise InvalidParams("need at least 3 observations in total")
        labels = [lbl for lbl, _ in groups]
        if len(set(labels)) != len(labels):
            raise InvalidParams(f"duplicate group labels: {labels}")

    @classmethod
    def from_mapping(cls, data) -> "GroupedSample":
        return cls(tuple(data.items()))

    @property
    def labels(self) -> list[str]:
        return [lbl for lbl, _ in self.groups]


@dataclass(frozen=True)
class PairwiseResult:
    label_a: str
    label_b: str
    z: float
    p_raw: float
    p_bonferroni: float
    significant: bool


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    H: float
    p_value: float
    pairwise: tuple


def _pooled_ranks(sample: GroupedSample):
    pooled = [v for _, vals in sample.groups for v in vals]
    ranks = average_ranks(pooled)
    out, start = [], 0
    for _, vals in sample.groups:
        out.append(ranks[start:start + len(vals)])
        start += len(vals)
    return pooled, out


def _tie_sum(pooled: Sequence[float]) -> float:
    counts: dict[float, int] = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    return float(sum(t ** 3 - t for t in counts.values()))


def kruskal_wallis(sample: GroupedSample) -> tuple[float, float]:
    """Tie-corrected Kruskal-Wallis H and its chi-square p-value.

    An all-identical pooled sample has no rank information; it returns
    ``(0.0, 1.0)``.
    """
    pooled, ranks = _pooled_ranks(sample)
    N = len(pooled)
    correction = 1.0 - _tie_sum(pooled) / (N ** 3 - N)
    if correction <= 0.0:
        return 0.0, 1.0
    ssum = sum(sum(r) ** 2 / len(r) for r in ranks)
    H = (12.0 / (N * (N + 1)) * ssum - 3.0 * (N + 1)) / correction
    H = max(H, 0.0)
    return H, chi2_sf(H, len(ranks) - 1)


def dunn_posthoc(sample: GroupedSample, alpha: float = 0.05) -> list[PairwiseResult]:
    """Dunn's pairwise z-tests on mean pooled ranks, Bonferroni-adjusted."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParams(f"alpha must lie in (0, 1), got {alpha}")
    pooled, ranks = _pooled_ranks(sample)
    N = len(pooled)
    labels = sample.labels
    pairs = list(combinations(range(len(labels)), 2))
    m = len(pairs)
    variance = N * (N + 1) / 12.0 - _tie_sum(pooled) / (12.0 * (N - 1))
    mean_rank = [sum(r) / len(r) for r in ranks]

    results = []
    for a, b in pairs:
        if variance <= 0.0:
            z, p_raw = 0.0, 1.0
        else:
            se = math.sqrt(variance * (1.0 / len(ranks[a]) + 1.0 / len(ranks[b])))
            z = (mean_rank[a] - mean_rank[b]) / se
            p_raw = norm_two_sided(z)
        p_adj = min(1.0, m * p_raw)
        results.append(PairwiseResult(labels[a], labels[b], z, p_raw, p_adj, p_adj < alpha))
    return results


def compare_groups(sample: GroupedSample, alpha: float = 0.05) -> TestReport:
    H, p = kruskal_wallis(sample)
    return TestReport(H=H, p_value=p, pairwise=tuple(dunn_posthoc(sample, alpha)))

