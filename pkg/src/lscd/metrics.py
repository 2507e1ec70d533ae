"""Evaluation statistics: Spearman rank correlation (average ranks for
ties), adjusted Rand index, purity, and target-weighted averages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import Clustering, DomainError, EmptyInputError


class MetricKind(str, Enum):
    SPEARMAN = "spearman"
    ARI = "ari"
    PURITY = "purity"
    AVG_W = "weighted_average"


@dataclass(frozen=True)
class EvalResult:
    metric: MetricKind
    value: float
    n: int


def rank_with_ties(values: Sequence[float]) -> np.ndarray:
    """1-based fractional ranks; tied values share their average rank."""
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.size, dtype=np.float64)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of fractional ranks."""
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise DomainError("need at least two observations")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise DomainError("correlation is undefined for constant input")
    ra = rank_with_ties(a)
    rb = rank_with_ties(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float(ra @ ra) * float(rb @ rb))
    return float(ra @ rb) / denom


def _pair_count(k: int) -> int:
    return k * (k - 1) // 2


def _dense(labels: Iterable[int]) -> list[int]:
    mapping: dict[int, int] = {}
    out = []
    for v in labels:
        mapping.setdefault(v, len(mapping))
        out.append(mapping[v])
    return out


def _check_same_items(a: Clustering, b: Clustering) -> list[str]:
    items_a = set(a.assignment)
    items_b = set(b.assignment)
    if items_a != items_b:
        missing = sorted(items_a ^ items_b)[:3]
        raise DomainError(f"clusterings cover different items (e.g. {missing})")
    return sorted(items_a)


def adjusted_rand_index(a: Clustering, b: Clustering) -> float:
    """Chance-corrected pair-counting agreement between two partitions.

    Computed with integer arithmetic so textbook cases are exact. When the
    expected and maximum indices coincide (both partitions all-singleton or
    both one-cluster), returns 1.0 for identical partitions, else 0.0.
    """
    items = _check_same_items(a, b)
    n = len(items)
    contingency: dict[tuple[int, int], int] = {}
    count_a: dict[int, int] = {}
    count_b: dict[int, int] = {}
    for item in items:
        la, lb = a.assignment[item], b.assignment[item]
        contingency[(la, lb)] = contingency.get((la, lb), 0) + 1
        count_a[la] = count_a.get(la, 0) + 1
        count_b[lb] = count_b.get(lb, 0) + 1
    index = sum(_pair_count(v) for v in contingency.values())
    sum_a = sum(_pair_count(v) for v in count_a.values())
    sum_b = sum(_pair_count(v) for v in count_b.values())
    total = _pair_count(n)
    # ARI = (index - sum_a*sum_b/total) / ((sum_a+sum_b)/2 - sum_a*sum_b/total)
    num = 2 * (total * index - sum_a * sum_b)
    den = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if den == 0:
        canon_a = _dense(a.assignment[i] for i in items)
        canon_b = _dense(b.assignment[i] for i in items)
        return 1.0 if canon_a == canon_b else 0.0
    return num / den


def purity(pred: Clustering, gold: Clustering) -> float:
    """Fraction of items whose predicted cluster's majority gold class they
    belong to."""
    items = _check_same_items(pred, gold)
    n = len(items)
    if n == 0:
        raise EmptyInputError("purity of empty clusterings is undefined")
    per_cluster: dict[int, dict[int, int]] = {}
    for item in items:
        cluster = pred.assignment[item]
        label = gold.assignment[item]
        bucket = per_cluster.setdefault(cluster, {})
        bucket[label] = bucket.get(label, 0) + 1
    correct = sum(max(bucket.values()) for bucket in per_cluster.values())
    return correct / n


def weighted_average(scores: Iterable[tuple[float, float]]) -> float:
    """Weighted mean of (value, weight) pairs with positive weights."""
    pairs = list(scores)
    if not pairs:
        raise EmptyInputError("weighted average of nothing")
    if any(w <= 0 for _, w in pairs):
        raise DomainError("weights must be positive")
    total = math.fsum(w for _, w in pairs)
    return math.fsum(v * w for v, w in pairs) / total
