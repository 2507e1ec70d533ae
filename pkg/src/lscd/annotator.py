"""Computational annotation: proximity judgments from embeddings, usage
graph construction, sense induction over the graph, and graph-based change
scores.

A model plays the role of a human annotator: the cosine similarity between
two usages' embeddings is mapped onto the relatedness scale (by default
linearly onto [1, 4], so similarity 0 lands exactly on the clustering
threshold 2.5) and recorded as a judgment. The judged pairs form a usage
graph; correlation clustering of that graph induces senses; change is the
square root of the JSD between the periods' sense distributions, or, for the
mean-relatedness procedure, the inverted mean weight of cross-period edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .clustering import CorrParams, correlation_cluster
from .core import (
    ChangeScore,
    Clustering,
    DomainError,
    Judgment,
    Method,
    UsageGraph,
    UsageInstance,
)
from .geometry import cosine_distance
from .sense_measures import cluster_distributions, jsd


@dataclass(frozen=True)
class ScaleMap:
    """Map from cosine similarity in [-1, 1] to the judgment scale."""

    kind: str = "linear"  # "linear" | "raw"
    lo: float = 1.0
    hi: float = 4.0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "raw"):
            raise DomainError(f"unknown scale map kind {self.kind!r}")
        if self.kind == "linear" and not self.lo < self.hi:
            raise DomainError("linear scale map requires lo < hi")

    @classmethod
    def linear(cls, lo: float = 1.0, hi: float = 4.0) -> "ScaleMap":
        return cls(kind="linear", lo=lo, hi=hi)

    @classmethod
    def raw(cls) -> "ScaleMap":
        return cls(kind="raw")

    @classmethod
    def parse(cls, text: str) -> "ScaleMap":
        """Parse ``"linear:1:4"`` or ``"raw"``."""
        parts = text.split(":")
        if parts[0] == "raw" and len(parts) == 1:
            return cls.raw()
        if parts[0] == "linear" and len(parts) == 3:
            return cls.linear(float(parts[1]), float(parts[2]))
        raise DomainError(f"cannot parse scale map {text!r}")

    def __str__(self) -> str:
        if self.kind == "raw":
            return "raw"
        return f"linear:{self.lo:g}:{self.hi:g}"


def scale_map(similarity: float, mapping: ScaleMap) -> float:
    """Apply a scale map to one similarity value."""
    if not math.isfinite(similarity):
        raise DomainError(f"similarity {similarity} is not finite")
    if mapping.kind == "raw":
        return similarity
    value = mapping.lo + (mapping.hi - mapping.lo) * (similarity + 1.0) / 2.0
    return min(mapping.hi, max(mapping.lo, value))


def wic_judgments(
    pairs: Sequence[tuple[str, str]],
    store: Mapping[str, np.ndarray],
    annotator_id: str,
    mapping: ScaleMap | None = None,
) -> tuple[list[Judgment], list[float]]:
    """Judge usage pairs by embedding similarity.

    Returns the judgments plus the raw cosine similarities, aligned with
    ``pairs``. The judgment value is symmetric in the pair order.
    """
    mapping = mapping or ScaleMap.linear()
    judgments: list[Judgment] = []
    similarities: list[float] = []
    for u1, u2 in pairs:
        for uid in (u1, u2):
            if uid not in store:
                raise DomainError(f"no embedding for usage {uid!r}")
        sim = 1.0 - cosine_distance(store[u1], store[u2])
        similarities.append(sim)
        judgments.append(
            Judgment(
                usage_id_1=u1,
                usage_id_2=u2,
                annotator=annotator_id,
                value=scale_map(sim, mapping),
            )
        )
    return judgments, similarities


def build_usage_graph(
    usages: Sequence[UsageInstance], judgments: Sequence[Judgment]
) -> UsageGraph:
    """Aggregate judgments into a weighted usage graph (one target word)."""
    if not usages:
        raise DomainError("cannot build a graph without usages")
    lemmas = {u.lemma for u in usages}
    if len(lemmas) > 1:
        raise DomainError(f"usages span multiple lemmas: {sorted(lemmas)}")
    return UsageGraph.build(lemma=usages[0].lemma, nodes=usages, judgments=judgments)


def wsi(graph: UsageGraph, params: CorrParams | None = None) -> Clustering:
    """Induce sense clusters from a usage graph."""
    return correlation_cluster(graph, params or CorrParams())


def _split_periods(
    graph: UsageGraph, periods: tuple[str, str]
) -> tuple[dict[str, str], int, int]:
    t1, t2 = periods
    period_of = graph.period_of
    unknown = sorted({p for p in period_of.values() if p not in (t1, t2)})
    if unknown:
        raise DomainError(f"graph contains periods outside {periods}: {unknown}")
    n1 = sum(1 for p in period_of.values() if p == t1)
    n2 = sum(1 for p in period_of.values() if p == t2)
    return period_of, n1, n2


def graph_gcd(
    graph: UsageGraph, clustering: Clustering, periods: tuple[str, str]
) -> ChangeScore:
    """Square root of the JSD between the two periods' cluster
    distributions; in [0, 1]."""
    period_of, n1, n2 = _split_periods(graph, periods)
    if n1 == 0 or n2 == 0:
        raise DomainError(
            f"both periods need usages for {graph.lemma!r} ({n1} and {n2} found)"
        )
    p1, p2 = cluster_distributions(clustering, period_of, periods)
    value = math.sqrt(jsd(p1, p2))
    return ChangeScore(
        lemma=graph.lemma,
        method=Method.GRAPH_JSD,
        value=value,
        period_pair=periods,
        meta={"n_clusters": clustering.n_clusters, "n1": n1, "n2": n2},
    )


def compare_metric(
    graph: UsageGraph, periods: tuple[str, str], scale_max: float = 4.0
) -> ChangeScore:
    """Inverted mean relatedness of cross-period edges, so that larger
    values mean more change; the raw mean is kept in ``meta``."""
    period_of, _, _ = _split_periods(graph, periods)
    t1, t2 = periods
    cross = [
        w
        for (a, b), w in sorted(graph.weights.items())
        if {period_of[a], period_of[b]} == {t1, t2}
    ]
    if not cross:
        raise DomainError(f"no cross-period edges for {graph.lemma!r}")
    mean_rel = math.fsum(cross) / len(cross)
    return ChangeScore(
        lemma=graph.lemma,
        method=Method.COMPARE,
        value=scale_max - mean_rel,
        period_pair=periods,
        meta={"mean_relatedness": mean_rel, "n_cross_edges": len(cross)},
    )
