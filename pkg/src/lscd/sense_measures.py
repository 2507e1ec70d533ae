"""Sense-based change scores.

``ap_jsd`` clusters both periods' embeddings jointly, then measures the
Jensen-Shannon divergence (base 2, so bounded by [0, 1]) between the two
periods' cluster distributions. ``widid`` clusters the periods one after the
other with the incremental engine and measures the average pairwise Canberra
distance between the periods' sense prototypes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .clustering import ApParams, AppMemory, app_step, _ap_on_matrix, SimilarityFn
from .core import ChangeScore, Clustering, DomainError, EmbeddingSet, EmptyInputError, Method
from .geometry import DistanceKind, cosine_similarity_matrix
from .form_measures import mean_pairwise_distance


@dataclass(frozen=True)
class ClusterDistribution:
    """Probability of each sense cluster within one time period."""

    probs: Mapping[int, float]
    empty: bool = False

    def __post_init__(self) -> None:
        if any(p < 0.0 for p in self.probs.values()):
            raise DomainError("cluster probabilities must be non-negative")
        total = math.fsum(self.probs.values())
        if self.empty:
            if total != 0.0:
                raise DomainError("an empty distribution must have zero mass")
        elif abs(total - 1.0) > 1e-9:
            raise DomainError(f"cluster probabilities sum to {total}, not 1")

    def vector(self, keys: Sequence[int]) -> np.ndarray:
        return np.array([self.probs[k] for k in keys], dtype=np.float64)


def cluster_distributions(
    clustering: Clustering,
    period_of: Mapping[str, str],
    periods: tuple[str, str],
) -> tuple[ClusterDistribution, ClusterDistribution]:
    """Per-period relative frequency of each cluster, over the union of
    cluster ids (zeros filled in). A period with no items yields a
    distribution flagged ``empty``."""
    t1, t2 = periods
    keys = clustering.cluster_ids
    counts = {t1: dict.fromkeys(keys, 0), t2: dict.fromkeys(keys, 0)}
    for item, cid in clustering.assignment.items():
        if item not in period_of:
            raise DomainError(f"clustered item {item!r} has no period")
        period = period_of[item]
        if period in counts:
            counts[period][cid] += 1
    out = []
    for t in (t1, t2):
        total = sum(counts[t].values())
        if total == 0:
            out.append(ClusterDistribution(probs=dict.fromkeys(keys, 0.0), empty=True))
        else:
            out.append(
                ClusterDistribution(probs={k: c / total for k, c in counts[t].items()})
            )
    return out[0], out[1]


def jsd(p1: ClusterDistribution, p2: ClusterDistribution) -> float:
    """Jensen-Shannon divergence, log base 2; symmetric, in [0, 1]."""
    if p1.empty or p2.empty:
        raise DomainError("JSD of an empty distribution is undefined")
    if set(p1.probs) != set(p2.probs):
        raise DomainError("distributions are over different cluster sets")
    keys = sorted(p1.probs)
    a = p1.vector(keys)
    b = p2.vector(keys)
    m = 0.5 * (a + b)
    total = 0.0
    for p in (a, b):
        nz = p > 0.0
        total += 0.5 * float(np.sum(p[nz] * np.log2(p[nz] / m[nz])))
    return min(1.0, max(0.0, total))


def _combined_period_of(phi1: EmbeddingSet, phi2: EmbeddingSet) -> dict[str, str]:
    overlap = set(phi1.usage_ids) & set(phi2.usage_ids)
    if overlap:
        raise DomainError(
            f"usage ids appear in both periods (e.g. {sorted(overlap)[:3]})"
        )
    if phi1.period_id == phi2.period_id:
        raise DomainError("the two embedding sets are from the same period")
    period_of = {uid: phi1.period_id for uid in phi1.usage_ids}
    period_of.update({uid: phi2.period_id for uid in phi2.usage_ids})
    return period_of


def ap_jsd(
    phi1: EmbeddingSet,
    phi2: EmbeddingSet,
    params: ApParams | None = None,
    sim: SimilarityFn | None = None,
) -> ChangeScore:
    """Jointly cluster both periods, then JSD between the period
    distributions over the resulting clusters."""
    params = params or ApParams()
    sim = sim or cosine_similarity_matrix
    if phi1.n == 0 or phi2.n == 0:
        raise EmptyInputError(
            f"both periods need embeddings for {phi1.lemma!r} "
            f"({phi1.n} and {phi2.n} given)"
        )
    if phi1.dim != phi2.dim:
        raise DomainError(f"dimension mismatch: {phi1.dim} vs {phi2.dim}")
    period_of = _combined_period_of(phi1, phi2)
    union = np.vstack([phi1.matrix, phi2.matrix])
    ids = phi1.usage_ids + phi2.usage_ids
    labels, exemplars, meta = _ap_on_matrix(union, sim, params)
    clustering = Clustering(
        assignment={uid: int(lab) for uid, lab in zip(ids, labels.tolist())},
        exemplars=exemplars,
        meta=meta,
    )
    p1, p2 = cluster_distributions(
        clustering, period_of, (phi1.period_id, phi2.period_id)
    )
    value = jsd(p1, p2)
    return ChangeScore(
        lemma=phi1.lemma,
        method=Method.AP_JSD,
        value=value,
        period_pair=(phi1.period_id, phi2.period_id),
        meta={
            "n_clusters": clustering.n_clusters,
            "converged": meta.get("converged"),
        },
    )


def sense_prototypes(clustering: Clustering, s: EmbeddingSet) -> list[np.ndarray]:
    """Mean embedding of this period's members of each cluster, ordered by
    cluster id; clusters without members from this period are skipped."""
    if s.n == 0:
        raise EmptyInputError(
            f"period {s.period_id!r} contributes no embeddings for {s.lemma!r}"
        )
    matrix = s.matrix
    rows_by_cluster: dict[int, list[int]] = {}
    for i, uid in enumerate(s.usage_ids):
        if uid in clustering.assignment:
            rows_by_cluster.setdefault(clustering.assignment[uid], []).append(i)
    return [
        matrix[rows_by_cluster[cid]].mean(axis=0) for cid in sorted(rows_by_cluster)
    ]


def widid(
    phi1: EmbeddingSet,
    phi2: EmbeddingSet,
    params: ApParams | None = None,
    sim: SimilarityFn | None = None,
) -> ChangeScore:
    """Incremental clustering over the two periods, then average pairwise
    Canberra distance between the periods' sense prototypes."""
    params = params or ApParams()
    if phi1.n == 0 or phi2.n == 0:
        raise EmptyInputError(
            f"both periods need embeddings for {phi1.lemma!r} "
            f"({phi1.n} and {phi2.n} given)"
        )
    if phi1.dim != phi2.dim:
        raise DomainError(f"dimension mismatch: {phi1.dim} vs {phi2.dim}")
    _combined_period_of(phi1, phi2)  # id-collision and period sanity checks

    c1, memory = app_step(AppMemory(), phi1, params=params, sim=sim)
    c2, memory = app_step(memory, phi2, params=params, sim=sim)

    # fold the first period's labels through the second step's merges
    id_map: Mapping[int, int] = c2.meta["id_map"]  # type: ignore[assignment]
    c1_final = Clustering(
        assignment={uid: id_map.get(cid, cid) for uid, cid in c1.assignment.items()},
        exemplars=None,
        meta={"folded_from_step": 1},
    )

    psi1 = sense_prototypes(c1_final, phi1)
    psi2 = sense_prototypes(c2, phi2)
    value = mean_pairwise_distance(
        np.vstack(psi1), np.vstack(psi2), DistanceKind.CANBERRA
    )
    return ChangeScore(
        lemma=phi1.lemma,
        method=Method.WIDID,
        value=value,
        period_pair=(phi1.period_id, phi2.period_id),
        meta={
            "n_senses_1": len(psi1),
            "n_senses_2": len(psi2),
            "memory_clusters": len(memory.entries),
        },
    )
