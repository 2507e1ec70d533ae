"""Clustering engines used by the sense-based measures and the annotation
pipeline.

Three engines live here:

- :func:`affinity_propagation`: exemplar-based clustering by responsibility /
  availability message passing with damping. The cluster count emerges from
  the data; the ``preference`` (default: median off-diagonal similarity)
  controls its granularity. Runs are fully deterministic: bitwise-identical
  rows are collapsed to one item up front, and degenerate runs that end with
  no exemplar (knife-edge similarity ties) fall back to singletons over the
  distinct rows with ``meta["converged"]=False`` instead of failing.
- :func:`app_step`: the incremental variant. Cluster prototypes (count
  weighted means) are carried across time steps, so cluster identities
  persist; a new cluster that absorbs several old prototypes inherits the
  smallest of their ids.
- :func:`correlation_cluster`: weighted correlation clustering of a usage
  graph around a relatedness threshold, exact (exhaustive over set
  partitions) for small graphs, greedy best-move descent with restarts
  otherwise. :func:`brute_force_correlation_cluster` is exposed separately as
  the testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels
from .core import (
    Clustering,
    DomainError,
    EmbeddingSet,
    EmptyInputError,
    UsageGraph,
)
from .geometry import cosine_similarity_matrix

SimilarityFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ApParams:
    """Affinity propagation knobs.

    ``preference=None`` means "median of the off-diagonal similarities".
    ``seed`` is recorded for provenance; message passing itself is
    deterministic and does not consume randomness.
    """

    damping: float = 0.9
    max_iter: int = 200
    convergence_iter: int = 15
    preference: float | None = None
    seed: int = 42

    def __post_init__(self) -> None:
        if not 0.5 <= self.damping < 1.0:
            raise DomainError(f"damping {self.damping} outside [0.5, 1)")
        if self.max_iter < 1 or self.convergence_iter < 1:
            raise DomainError("max_iter and convergence_iter must be positive")


@dataclass(frozen=True)
class MemoryEntry:
    cluster_id: int
    prototype: np.ndarray
    count: int


@dataclass(frozen=True)
class AppMemory:
    """Evolving cluster state carried between incremental clustering steps."""

    entries: tuple[MemoryEntry, ...] = ()
    step: int = 0

    def __post_init__(self) -> None:
        ids = [e.cluster_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DomainError("memory cluster ids must be unique")
        if any(e.count < 1 for e in self.entries):
            raise DomainError("memory counts must be >= 1")
        dims = {np.asarray(e.prototype).shape for e in self.entries}
        if len(dims) > 1:
            raise DomainError("memory prototypes disagree on dimension")

    @property
    def dim(self) -> int | None:
        if not self.entries:
            return None
        return int(np.asarray(self.entries[0].prototype).shape[0])

    @property
    def cluster_ids(self) -> tuple[int, ...]:
        return tuple(e.cluster_id for e in self.entries)


@dataclass(frozen=True)
class CorrParams:
    """Correlation clustering knobs; ``threshold`` lives on the judgment
    scale (2.5 = midpoint between "distantly related" and "closely
    related")."""

    threshold: float = 2.5
    restarts: int = 20
    max_moves: int = 10_000
    seed: int = 42
    exact_below: int = 10

    def __post_init__(self) -> None:
        if not 1.0 <= self.threshold <= 4.0:
            raise DomainError(f"threshold {self.threshold} outside the [1, 4] scale")
        if self.restarts < 1 or self.max_moves < 1:
            raise DomainError("restarts and max_moves must be positive")
        if self.exact_below < 0:
            raise DomainError("exact_below must be >= 0")


def _dense_labels(labels: Sequence[int]) -> list[int]:
    mapping: dict[int, int] = {}
    out = []
    for v in labels:
        mapping.setdefault(int(v), len(mapping))
        out.append(mapping[int(v)])
    return out


def _deduplicate_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Collapse bitwise-identical rows; returns (representatives, rep_index)."""
    seen: dict[bytes, int] = {}
    rep_rows: list[int] = []
    rep_index = np.empty(x.shape[0], dtype=np.int64)
    for i in range(x.shape[0]):
        key = x[i].tobytes()
        if key not in seen:
            seen[key] = len(rep_rows)
            rep_rows.append(i)
        rep_index[i] = seen[key]
    return x[rep_rows], rep_index


def _ap_on_matrix(
    x: np.ndarray,
    sim: SimilarityFn,
    params: ApParams,
) -> tuple[np.ndarray, dict[int, int], dict[str, object]]:
    """Cluster matrix rows; returns (labels, exemplar row per label, meta).

    Labels are dense, numbered by first appearance in row order.
    """
    n = x.shape[0]
    if n == 0:
        raise EmptyInputError("cannot cluster an empty embedding set")
    reps, rep_index = _deduplicate_rows(np.ascontiguousarray(x, dtype=np.float64))
    m = reps.shape[0]
    meta: dict[str, object] = {"n_items": n, "n_distinct": m, "seed": params.seed}
    if m == 1:
        meta.update(converged=True, iterations=0, preference=None)
        return np.zeros(n, dtype=np.int64), {0: 0}, meta

    s = np.array(sim(reps), dtype=np.float64)
    if s.shape != (m, m):
        raise DomainError(f"similarity function returned shape {s.shape}, expected {(m, m)}")
    if not np.isfinite(s).all():
        raise DomainError("similarity matrix contains non-finite values")
    off_diag = s[~np.eye(m, dtype=bool)]
    pref = float(np.median(off_diag)) if params.preference is None else float(params.preference)
    s[np.diag_indices(m)] = pref

    r, a, iterations, converged = _kernels.ap_message_passing(
        s, params.damping, params.max_iter, params.convergence_iter
    )
    meta.update(iterations=int(iterations), preference=pref)

    evidence = np.diag(a) + np.diag(r)
    exemplar_reps = np.flatnonzero(evidence > 0.0)
    if exemplar_reps.size == 0:
        # degenerate run (e.g. all similarities equal, so every message stays
        # zero): no exemplar ever emerges. Fall back to singletons over the
        # distinct rows and flag the run instead of failing.
        meta["converged"] = False
        labels_full = rep_index.copy()
        exemplars = {}
        for rep in range(m):
            rows = np.flatnonzero(rep_index == rep)
            exemplars[int(labels_full[rows[0]])] = int(rows[0])
        return labels_full, exemplars, meta
    meta["converged"] = bool(converged)

    k = exemplar_reps.size
    c = np.argmax(s[:, exemplar_reps], axis=1)
    c[exemplar_reps] = np.arange(k)
    for j in range(k):
        members = np.flatnonzero(c == j)
        best = members[np.argmax(s[np.ix_(members, members)].sum(axis=0))]
        exemplar_reps[j] = best
    c = np.argmax(s[:, exemplar_reps], axis=1)
    c[exemplar_reps] = np.arange(k)

    labels_full = c[rep_index]
    dense = np.array(_dense_labels(labels_full.tolist()), dtype=np.int64)
    exemplars: dict[int, int] = {}
    for j in range(k):
        rep = int(exemplar_reps[j])
        rows = np.flatnonzero(rep_index == rep)
        cid = int(dense[rows[0]])
        exemplars.setdefault(cid, int(rows[0]))
    return dense, exemplars, meta


def affinity_propagation(
    s: EmbeddingSet,
    sim: SimilarityFn | None = None,
    params: ApParams | None = None,
) -> Clustering:
    """Partition an embedding set; every cluster's exemplar is a member."""
    params = params or ApParams()
    sim = sim or cosine_similarity_matrix
    if s.n == 0:
        raise EmptyInputError(f"no embeddings to cluster for {s.lemma!r}")
    labels, exemplars, meta = _ap_on_matrix(s.matrix, sim, params)
    assignment = {uid: int(lab) for uid, lab in zip(s.usage_ids, labels.tolist())}
    return Clustering(assignment=assignment, exemplars=exemplars, meta=meta)


def _memory_from_clusters(
    phi: EmbeddingSet, labels: np.ndarray, step: int
) -> AppMemory:
    entries = []
    matrix = phi.matrix
    for cid in sorted(set(labels.tolist())):
        rows = np.flatnonzero(labels == cid)
        entries.append(
            MemoryEntry(
                cluster_id=int(cid),
                prototype=matrix[rows].mean(axis=0),
                count=int(rows.size),
            )
        )
    return AppMemory(entries=tuple(entries), step=step)


def app_step(
    memory: AppMemory,
    phi: EmbeddingSet,
    params: ApParams | None = None,
    sim: SimilarityFn | None = None,
) -> tuple[Clustering, AppMemory]:
    """One incremental clustering step over the stored prototypes plus the
    new period's embeddings.

    Returns the clustering of ``phi``'s usages (cluster ids consistent with
    the memory's identities) and the updated memory. ``meta["id_map"]`` on
    the clustering records where every pre-existing cluster id went.
    """
    params = params or ApParams()
    sim = sim or cosine_similarity_matrix
    if phi.n == 0:
        raise EmptyInputError(f"no embeddings for ({phi.lemma!r}, {phi.period_id!r})")

    if not memory.entries:
        clustering = affinity_propagation(phi, sim=sim, params=params)
        labels = clustering.labels_for(phi.usage_ids)
        new_memory = _memory_from_clusters(phi, labels, step=memory.step + 1)
        meta = dict(clustering.meta)
        meta["id_map"] = {}
        return (
            Clustering(assignment=clustering.assignment, exemplars=clustering.exemplars, meta=meta),
            new_memory,
        )

    if memory.dim != phi.dim:
        raise DomainError(
            f"memory dimension {memory.dim} does not match embeddings of dim {phi.dim}"
        )

    protos = np.vstack([np.asarray(e.prototype, dtype=np.float64) for e in memory.entries])
    union = np.vstack([protos, phi.matrix])
    labels, _, meta = _ap_on_matrix(union, sim, params)

    n_old = len(memory.entries)
    next_fresh = max(e.cluster_id for e in memory.entries) + 1
    union_cluster_ids = sorted(set(labels.tolist()))
    mapped: dict[int, int] = {}
    for uc in union_cluster_ids:
        old_here = [memory.entries[i].cluster_id for i in range(n_old) if labels[i] == uc]
        if old_here:
            mapped[uc] = min(old_here)
    for uc in union_cluster_ids:
        if uc not in mapped:
            mapped[uc] = next_fresh
            next_fresh += 1

    id_map = {
        memory.entries[i].cluster_id: mapped[int(labels[i])] for i in range(n_old)
    }

    matrix = phi.matrix
    entries = []
    for uc in union_cluster_ids:
        old_here = [memory.entries[i] for i in range(n_old) if labels[i] == uc]
        new_rows = np.flatnonzero(labels[n_old:] == uc)
        count = sum(e.count for e in old_here) + int(new_rows.size)
        weighted = np.zeros(phi.dim, dtype=np.float64)
        for e in old_here:
            weighted += e.count * np.asarray(e.prototype, dtype=np.float64)
        if new_rows.size:
            weighted += matrix[new_rows].sum(axis=0)
        entries.append(
            MemoryEntry(cluster_id=mapped[uc], prototype=weighted / count, count=count)
        )
    entries.sort(key=lambda e: e.cluster_id)

    phi_labels = labels[n_old:]
    assignment = {
        uid: mapped[int(lab)] for uid, lab in zip(phi.usage_ids, phi_labels.tolist())
    }
    meta = dict(meta)
    meta["id_map"] = id_map
    clustering = Clustering(assignment=assignment, exemplars=None, meta=meta)
    return clustering, AppMemory(entries=tuple(entries), step=memory.step + 1)


# ---------------------------------------------------------------------------
# correlation clustering
# ---------------------------------------------------------------------------


def _edge_arrays(
    graph: UsageGraph,
) -> tuple[dict[str, int], np.ndarray, np.ndarray, np.ndarray]:
    index = {uid: i for i, uid in enumerate(graph.usage_ids)}
    ei, ej, w = [], [], []
    for (a, b), weight in sorted(graph.weights.items()):
        ei.append(index[a])
        ej.append(index[b])
        w.append(weight)
    return (
        index,
        np.array(ei, dtype=np.int64),
        np.array(ej, dtype=np.int64),
        np.array(w, dtype=np.float64),
    )


def correlation_loss(graph: UsageGraph, clustering: Clustering, threshold: float) -> float:
    """Weighted disagreement of a partition: within-cluster edges pay
    ``max(0, threshold - w)``, cross-cluster edges pay ``max(0, w - threshold)``."""
    index, ei, ej, w = _edge_arrays(graph)
    labels = np.empty(len(index), dtype=np.int64)
    for uid, i in index.items():
        if uid not in clustering.assignment:
            raise DomainError(f"node {uid!r} is not assigned to any cluster")
        labels[i] = clustering.assignment[uid]
    if ei.size == 0:
        return 0.0
    return float(_kernels.correlation_loss_edges(labels, ei, ej, w, float(threshold)))


def brute_force_correlation_cluster(graph: UsageGraph, threshold: float) -> Clustering:
    """Exact minimum-loss partition by exhaustive enumeration (<= 12 nodes).

    Ties break toward fewer clusters, then the lexicographically smallest
    canonical label sequence over the graph's node order.
    """
    n = len(graph.nodes)
    if n == 0:
        raise EmptyInputError("cannot cluster an empty graph")
    if n > 12:
        raise DomainError(f"brute force is limited to 12 nodes, got {n}")
    _, ei, ej, w = _edge_arrays(graph)
    cw = np.maximum(0.0, float(threshold) - w)
    ca = np.maximum(0.0, w - float(threshold))
    labels, loss = _kernels.brute_force_rgs(n, ei, ej, cw, ca)
    assignment = {uid: int(lab) for uid, lab in zip(graph.usage_ids, labels)}
    return Clustering(
        assignment=assignment,
        exemplars=None,
        meta={"loss": float(loss), "exact": True, "threshold": float(threshold)},
    )


def _csr_arrays(
    n: int, ei: np.ndarray, ej: np.ndarray, w: np.ndarray, threshold: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    degree = np.zeros(n, dtype=np.int64)
    for t in range(ei.size):
        degree[ei[t]] += 1
        degree[ej[t]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(degree)
    indices = np.zeros(int(indptr[-1]), dtype=np.int64)
    slot_cw = np.zeros(int(indptr[-1]))
    slot_ca = np.zeros(int(indptr[-1]))
    cursor = indptr[:-1].copy()
    for t in range(ei.size):
        i, j, weight = int(ei[t]), int(ej[t]), float(w[t])
        cw = max(0.0, threshold - weight)
        ca = max(0.0, weight - threshold)
        for u, v in ((i, j), (j, i)):
            slot = cursor[u]
            indices[slot] = v
            slot_cw[slot] = cw
            slot_ca[slot] = ca
            cursor[u] += 1
    return indptr, indices, slot_cw, slot_ca


def correlation_cluster(graph: UsageGraph, params: CorrParams | None = None) -> Clustering:
    """Minimum-disagreement partition of a usage graph.

    Exact for graphs with at most ``params.exact_below`` nodes; otherwise a
    greedy best-single-node-move descent seeded from all-singletons and from
    ``params.restarts`` random balanced 2-cuts, keeping the best result.
    Nodes with no incident edges always end up as singletons.
    """
    params = params or CorrParams()
    n = len(graph.nodes)
    if n == 0:
        raise EmptyInputError("cannot cluster an empty graph")
    if n <= params.exact_below:
        return brute_force_correlation_cluster(graph, params.threshold)

    _, ei, ej, w = _edge_arrays(graph)
    tau = float(params.threshold)
    indptr, indices, slot_cw, slot_ca = _csr_arrays(n, ei, ej, w, tau)

    def descend(start: np.ndarray) -> tuple[float, np.ndarray, int]:
        labels = start.copy()
        moves = int(
            _kernels.greedy_descent(labels, indptr, indices, slot_cw, slot_ca, params.max_moves)
        )
        loss = float(_kernels.correlation_loss_edges(labels, ei, ej, w, tau))
        return loss, labels, moves

    best_loss, best_labels, total_moves = descend(np.arange(n, dtype=np.int64))
    rng = np.random.default_rng(params.seed)
    for _ in range(params.restarts):
        perm = rng.permutation(n)
        start = np.zeros(n, dtype=np.int64)
        start[perm[n // 2 :]] = 1
        loss, labels, moves = descend(start)
        total_moves += moves
        if loss < best_loss - 1e-12:
            best_loss, best_labels = loss, labels

    degree = np.zeros(n, dtype=np.int64)
    for t in range(ei.size):
        degree[ei[t]] += 1
        degree[ej[t]] += 1
    fresh = int(best_labels.max()) + 1
    for u in np.flatnonzero(degree == 0):
        best_labels[u] = fresh
        fresh += 1

    dense = _dense_labels(best_labels.tolist())
    assignment = {uid: lab for uid, lab in zip(graph.usage_ids, dense)}
    return Clustering(
        assignment=assignment,
        exemplars=None,
        meta={
            "loss": float(best_loss),
            "exact": False,
            "threshold": tau,
            "restarts": params.restarts,
            "moves": total_moves,
            "seed": params.seed,
        },
    )
