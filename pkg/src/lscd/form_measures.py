"""Form-based graded change scores.

APD averages the pairwise distance between every embedding of one period and
every embedding of the other; PRT is the cosine distance between the two
period prototypes. Both return :class:`~lscd.core.ChangeScore` records.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ChangeScore, DomainError, EmbeddingSet, EmptyInputError, Method
from .geometry import DistanceKind, cosine_distance, distance_matrix, prototype


def _check_nonempty(s: EmbeddingSet) -> None:
    if s.n == 0:
        raise EmptyInputError(
            f"no embeddings for ({s.lemma!r}, period {s.period_id!r})"
        )


def mean_pairwise_distance(
    a: np.ndarray, b: np.ndarray, kind: DistanceKind = DistanceKind.COSINE
) -> float:
    """Mean distance over the full cross product of rows.

    The reduction uses ``math.fsum`` (correctly rounded), so the result is
    exactly symmetric in its arguments and independent of enumeration order.
    """
    d = distance_matrix(a, b, kind)
    return math.fsum(d.ravel().tolist()) / d.size


def apd(
    phi1: EmbeddingSet,
    phi2: EmbeddingSet,
    distance: DistanceKind = DistanceKind.COSINE,
) -> ChangeScore:
    """Average pairwise distance between two embedding sets."""
    _check_nonempty(phi1)
    _check_nonempty(phi2)
    if phi1.dim != phi2.dim:
        raise DomainError(
            f"dimension mismatch for {phi1.lemma!r}: {phi1.dim} vs {phi2.dim}"
        )
    value = mean_pairwise_distance(phi1.matrix, phi2.matrix, distance)
    return ChangeScore(
        lemma=phi1.lemma,
        method=Method.APD,
        value=value,
        period_pair=(phi1.period_id, phi2.period_id),
        meta={"distance": distance.value, "n1": phi1.n, "n2": phi2.n},
    )


def prt(phi1: EmbeddingSet, phi2: EmbeddingSet) -> ChangeScore:
    """Cosine distance between the period prototype (mean) embeddings."""
    _check_nonempty(phi1)
    _check_nonempty(phi2)
    if phi1.dim != phi2.dim:
        raise DomainError(
            f"dimension mismatch for {phi1.lemma!r}: {phi1.dim} vs {phi2.dim}"
        )
    mu1 = prototype(phi1)
    mu2 = prototype(phi2)
    for period, mu in ((phi1.period_id, mu1), (phi2.period_id, mu2)):
        if not np.any(mu != 0.0):
            raise DomainError(f"prototype for period {period!r} is the zero vector")
    value = cosine_distance(mu1, mu2)
    return ChangeScore(
        lemma=phi1.lemma,
        method=Method.PRT,
        value=value,
        period_pair=(phi1.period_id, phi2.period_id),
        meta={"n1": phi1.n, "n2": phi2.n},
    )
