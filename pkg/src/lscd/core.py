"""Shared data model: word usages, embedding sets, judgments, usage graphs,
clusterings and change scores.

All types are immutable after construction and safe to share across workers.
Constructors raise on malformed input; :func:`validate_dataset` instead
reports cross-reference problems as data, for callers that want a survey of a
loaded dataset rather than an exception on the first defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class LscdError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LscdError, ValueError):
    """An argument violates an operation's precondition."""


class EmptyInputError(DomainError):
    """An operation received an empty collection it cannot handle."""


class SchemaError(LscdError, ValueError):
    """A data file does not match its expected layout."""


class Method(str, Enum):
    """Change-score methods produced by this package."""

    APD = "APD"
    PRT = "PRT"
    AP_JSD = "AP_JSD"
    WIDID = "WIDID"
    GRAPH_JSD = "GRAPH_JSD"
    COMPARE = "COMPARE"


@dataclass(frozen=True)
class UsageInstance:
    """One occurrence of a target word in a dated context."""

    usage_id: str
    lemma: str
    context: str
    target_start: int
    target_end: int
    period_id: str

    def __post_init__(self) -> None:
        if not (0 <= self.target_start < self.target_end <= len(self.context)):
            raise DomainError(
                f"usage {self.usage_id!r}: target span "
                f"[{self.target_start}, {self.target_end}) is invalid for a "
                f"context of length {len(self.context)}"
            )

    @property
    def target_text(self) -> str:
        return self.context[self.target_start : self.target_end]


@dataclass(frozen=True)
class Judgment:
    """A relatedness judgment for an unordered pair of usages, on [1, 4]."""

    usage_id_1: str
    usage_id_2: str
    annotator: str
    value: float

    def __post_init__(self) -> None:
        if not (1.0 <= self.value <= 4.0):
            raise DomainError(
                f"judgment value {self.value} for pair "
                f"({self.usage_id_1!r}, {self.usage_id_2!r}) is outside [1, 4]"
            )

    @property
    def pair(self) -> tuple[str, str]:
        """Canonical (sorted) form of the unordered usage pair."""
        a, b = self.usage_id_1, self.usage_id_2
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """The contextualized vectors of one target word in one time period.

    ``vectors`` is an (n, dim) float64 matrix whose rows align with
    ``usage_ids``. Construct through :meth:`build` to get validation; the
    plain constructor stores whatever it is given so that
    :func:`validate_dataset` can inspect malformed data.
    """

    lemma: str
    period_id: str
    dim: int
    vectors: np.ndarray
    usage_ids: tuple[str, ...]
    layer_spec: str = "raw"

    @classmethod
    def build(
        cls,
        lemma: str,
        period_id: str,
        vectors,
        usage_ids: Sequence[str] | None = None,
        layer_spec: str = "raw",
    ) -> "EmbeddingSet":
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1) if matrix.size else matrix.reshape(0, 0)
        if matrix.ndim != 2:
            raise DomainError(f"embedding matrix for {lemma!r} must be 2-d")
        n, dim = matrix.shape
        if usage_ids is None:
            usage_ids = tuple(f"{lemma}:{period_id}:{i}" for i in range(n))
        out = cls(lemma, period_id, int(dim), matrix, tuple(usage_ids), layer_spec)
        problems = out.validate()
        if problems:
            raise DomainError("; ".join(problems))
        return out

    def validate(self) -> list[str]:
        """Return invariant violations as strings (empty when valid)."""
        problems: list[str] = []
        where = f"embeddings for ({self.lemma!r}, {self.period_id!r})"
        rows = list(self.vectors)
        if len(rows) != len(self.usage_ids):
            problems.append(
                f"{where}: {len(rows)} vectors but {len(self.usage_ids)} usage ids"
            )
        for i, row in enumerate(rows):
            arr = np.asarray(row, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self.dim:
                problems.append(
                    f"{where}: row {i} has length {arr.size}, expected dim={self.dim}"
                )
            elif not np.isfinite(arr).all():
                problems.append(f"{where}: row {i} contains NaN or Inf")
        if len(set(self.usage_ids)) != len(self.usage_ids):
            problems.append(f"{where}: duplicate usage ids")
        return problems

    @property
    def n(self) -> int:
        return len(self.usage_ids)

    @property
    def matrix(self) -> np.ndarray:
        return np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))

    def row(self, usage_id: str) -> np.ndarray:
        idx = self.usage_ids.index(usage_id)
        return np.asarray(self.vectors[idx], dtype=np.float64)


def _aggregate_weight(values: Sequence[float]) -> float:
    # correctly-rounded mean: insensitive to accumulation order
    return math.fsum(values) / len(values)


@dataclass(frozen=True, eq=False)
class UsageGraph:
    """Weighted diachronic word usage graph.

    Nodes are usages; an edge weight is the arithmetic mean of the judgments
    on that unordered pair. Construct through :meth:`build`.
    """

    lemma: str
    nodes: tuple[UsageInstance, ...]
    edge_judgments: Mapping[tuple[str, str], tuple[Judgment, ...]]
    weights: Mapping[tuple[str, str], float]

    @classmethod
    def build(
        cls,
        lemma: str,
        nodes: Sequence[UsageInstance],
        judgments: Iterable[Judgment],
    ) -> "UsageGraph":
        ids = [u.usage_id for u in nodes]
        known = set(ids)
        if len(known) != len(ids):
            raise DomainError(f"graph for {lemma!r}: duplicate usage ids")
        grouped: dict[tuple[str, str], list[Judgment]] = {}
        for j in judgments:
            if j.usage_id_1 not in known:
                raise DomainError(f"judgment references unknown usage {j.usage_id_1!r}")
            if j.usage_id_2 not in known:
                raise DomainError(f"judgment references unknown usage {j.usage_id_2!r}")
            if j.usage_id_1 == j.usage_id_2:
                raise DomainError(f"self-judgment on usage {j.usage_id_1!r}")
            grouped.setdefault(j.pair, []).append(j)
        weights = {
            pair: _aggregate_weight([j.value for j in js]) for pair, js in grouped.items()
        }
        return cls(
            lemma=lemma,
            nodes=tuple(nodes),
            edge_judgments={p: tuple(js) for p, js in grouped.items()},
            weights=dict(weights),
        )

    @property
    def usage_ids(self) -> tuple[str, ...]:
        return tuple(u.usage_id for u in self.nodes)

    @property
    def period_of(self) -> dict[str, str]:
        return {u.usage_id: u.period_id for u in self.nodes}

    def edges(self) -> list[tuple[str, str, float]]:
        return [(a, b, w) for (a, b), w in sorted(self.weights.items())]


@dataclass(frozen=True, eq=False)
class Clustering:
    """A partition of items (usage ids) into dense integer cluster ids."""

    assignment: Mapping[str, int]
    exemplars: Mapping[int, int] | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = sorted(set(self.assignment.values()))
        if any(c < 0 for c in ids):
            raise DomainError("cluster ids must be non-negative")

    @property
    def cluster_ids(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.assignment.values())))

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment.values()))

    def members(self, cluster_id: int) -> tuple[str, ...]:
        return tuple(sorted(k for k, v in self.assignment.items() if v == cluster_id))

    def labels_for(self, items: Sequence[str]) -> np.ndarray:
        return np.array([self.assignment[i] for i in items], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ChangeScore:
    """A graded change score for one target word between two periods."""

    lemma: str
    method: Method
    value: float
    period_pair: tuple[str, str]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise DomainError(f"{self.method.value} score for {self.lemma!r} is not finite")


def validate_dataset(
    usages: Sequence[UsageInstance],
    embeddings: Sequence[EmbeddingSet],
    judgments: Sequence[Judgment],
) -> list[str]:
    """Cross-check a loaded dataset; returns one string per violation.

    An empty result means every judgment endpoint and embedding row resolves
    to a known usage and lemmas/periods/dimensions are mutually consistent.
    """
    problems: list[str] = []
    by_id: dict[str, UsageInstance] = {}
    for u in usages:
        if u.usage_id in by_id:
            problems.append(f"duplicate usage id {u.usage_id!r}")
        by_id[u.usage_id] = u
    for j in judgments:
        for uid in (j.usage_id_1, j.usage_id_2):
            if uid not in by_id:
                problems.append(f"judgment by {j.annotator!r} references unknown usage {uid!r}")
    for e in embeddings:
        problems.extend(e.validate())
        for uid in e.usage_ids:
            u = by_id.get(uid)
            if u is None:
                problems.append(
                    f"embeddings for ({e.lemma!r}, {e.period_id!r}) reference "
                    f"unknown usage {uid!r}"
                )
                continue
            if u.lemma != e.lemma:
                problems.append(
                    f"usage {uid!r} has lemma {u.lemma!r} but appears in embeddings "
                    f"for {e.lemma!r}"
                )
            if u.period_id != e.period_id:
                problems.append(
                    f"usage {uid!r} is from period {u.period_id!r} but appears in "
                    f"embeddings for period {e.period_id!r}"
                )
    return problems
