"""Distances, prototype vectors and encoder-layer aggregation.

The two distances used by the change measures are cosine distance
(``1 - cos(u, v)``, range [0, 2]) and the Canberra distance
(``sum |u_i - v_i| / (|u_i| + |v_i|)`` with 0/0 coordinates contributing 0).
Layer aggregation combines per-encoder-layer embedding sets by summation or
concatenation and records its provenance in a ``layer_spec`` string:
``"12"`` for a single layer, ``"sum:1+4+5"``, ``"cat:9+10+11+12"``.
"""

from __future__ import annotations

import itertools
import math
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .core import DomainError, EmptyInputError, EmbeddingSet


class DistanceKind(str, Enum):
    COSINE = "cosine"
    CANBERRA = "canberra"


class LayerMode(str, Enum):
    SUM = "sum"
    CONCAT = "cat"


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise EmptyInputError(f"argument {name} is empty")
    return v


def cosine_distance(u, v) -> float:
    """Cosine distance ``1 - cos(u, v)``; 0 for identical directions, 2 for
    opposite ones. Raises on zero-norm input, naming the offending argument."""
    a = _as_vector(u, "u")
    b = _as_vector(v, "v")
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    if np.array_equal(a, b):
        return 0.0
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0:
        raise DomainError("argument u has zero norm")
    if nb == 0.0:
        raise DomainError("argument v has zero norm")
    cos = float(a @ b) / (na * nb)
    cos = max(-1.0, min(1.0, cos))
    return 1.0 - cos


def canberra_distance(u, v) -> float:
    """Canberra distance with the 0/0 -> 0 convention."""
    a = _as_vector(u, "u")
    b = _as_vector(v, "v")
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    num = np.abs(a - b)
    den = np.abs(a) + np.abs(b)
    mask = den > 0.0
    return float(math.fsum((num[mask] / den[mask]).tolist()))


def distance_matrix(a: np.ndarray, b: np.ndarray, kind: DistanceKind) -> np.ndarray:
    """Pairwise distances between the rows of two matrices."""
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    b = np.ascontiguousarray(np.asarray(b, dtype=np.float64))
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DomainError(f"incompatible shapes {a.shape} and {b.shape}")
    if kind is DistanceKind.COSINE:
        for name, m in (("first", a), ("second", b)):
            norms = np.einsum("ij,ij->i", m, m)
            if not np.all(norms > 0.0):
                row = int(np.flatnonzero(norms == 0.0)[0])
                raise DomainError(f"{name} matrix has a zero-norm row (index {row})")
        return _kernels.cosine_distance_matrix(a, b)
    return _kernels.canberra_distance_matrix(a, b)


def cosine_similarity_matrix(x: np.ndarray) -> np.ndarray:
    """Symmetric cosine similarities between all rows of ``x``."""
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    return 1.0 - distance_matrix(x, x, DistanceKind.COSINE)


def prototype(s: EmbeddingSet | np.ndarray) -> np.ndarray:
    """Componentwise mean vector of an embedding set."""
    matrix = s.matrix if isinstance(s, EmbeddingSet) else np.asarray(s, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.shape[0] == 0:
        raise EmptyInputError("cannot take the prototype of an empty set")
    return matrix.mean(axis=0)


def format_layer_spec(mode: LayerMode, combo: Sequence[int]) -> str:
    combo = sorted(combo)
    if len(combo) == 1:
        return str(combo[0])
    return f"{mode.value}:" + "+".join(str(i) for i in combo)


def parse_layer_spec(spec: str) -> tuple[LayerMode | None, list[int]]:
    """Inverse of :func:`format_layer_spec`; single layers return (None, [k])."""
    if ":" in spec:
        head, _, tail = spec.partition(":")
        mode = LayerMode(head)
        combo = [int(t) for t in tail.split("+")]
        return mode, combo
    return None, [int(spec)]


def aggregate_layers(
    stack: Sequence[EmbeddingSet],
    combo: Sequence[int],
    mode: LayerMode,
) -> EmbeddingSet:
    """Combine per-layer embedding sets (1-based indices into ``stack``).

    SUM adds the selected layers componentwise; CONCAT concatenates them in
    combo order. Usage order must agree across the selected layers.
    """
    if not combo:
        raise DomainError("layer combo is empty")
    combo = sorted(combo)
    if len(set(combo)) != len(combo):
        raise DomainError(f"layer combo {combo} has duplicate indices")
    n_layers = len(stack)
    for idx in combo:
        if not 1 <= idx <= n_layers:
            raise DomainError(f"layer index {idx} out of range [1, {n_layers}]")
    selected = [stack[i - 1] for i in combo]
    first = selected[0]
    for s in selected[1:]:
        if s.usage_ids != first.usage_ids:
            raise DomainError(
                f"layers for ({first.lemma!r}, {first.period_id!r}) disagree on usage order"
            )
        if s.dim != first.dim:
            raise DomainError(
                f"layers for ({first.lemma!r}, {first.period_id!r}) disagree on dim"
            )
    matrices = [s.matrix for s in selected]
    if mode is LayerMode.SUM:
        combined = np.sum(matrices, axis=0)
    else:
        combined = np.concatenate(matrices, axis=1)
    return EmbeddingSet.build(
        lemma=first.lemma,
        period_id=first.period_id,
        vectors=combined,
        usage_ids=first.usage_ids,
        layer_spec=format_layer_spec(mode, combo),
    )


def enumerate_layer_combos(n_layers: int, lengths: Iterable[int]) -> list[list[int]]:
    """All sorted subsets of ``{1..n_layers}`` whose size is in ``lengths``,
    in lexicographic order."""
    if n_layers < 1:
        raise DomainError("n_layers must be >= 1")
    wanted = sorted(set(lengths))
    for size in wanted:
        if size < 1:
            raise DomainError(f"combo length {size} must be >= 1")
    combos: list[list[int]] = []
    for size in wanted:
        combos.extend(list(c) for c in itertools.combinations(range(1, n_layers + 1), size))
    combos.sort()
    return combos
