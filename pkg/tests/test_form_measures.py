import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lscd.core import DomainError, EmbeddingSet, EmptyInputError
from lscd.form_measures import apd, prt
from lscd.geometry import DistanceKind, canberra_distance, cosine_distance


def emb(rows, period="C1", lemma="w", prefix=None):
    ids = [f"{prefix or period}:{i}" for i in range(len(rows))]
    return EmbeddingSet.build(lemma, period, rows, usage_ids=ids)


def brute_force_apd(rows1, rows2, dist):
    total = [dist(a, b) for a, b in itertools.product(rows1, rows2)]
    return math.fsum(total) / len(total)


class TestApd:
    def test_identical_singletons(self):
        assert apd(emb([[1.0, 0.0]]), emb([[1.0, 0.0]], "C2")).value == 0.0

    def test_orthogonal_singletons(self):
        assert apd(emb([[1.0, 0.0]]), emb([[0.0, 1.0]], "C2")).value == 1.0

    def test_two_by_one_brute_force(self):
        phi1 = emb([[1.0, 0.0], [0.0, 1.0]])
        phi2 = emb([[1.0, 0.0]], "C2")
        expected = brute_force_apd(phi1.matrix, phi2.matrix, cosine_distance)
        score = apd(phi1, phi2)
        assert score.value == pytest.approx(0.5, abs=1e-12)
        assert score.value == pytest.approx(expected, abs=1e-12)

    def test_empty_set_names_period(self):
        empty = EmbeddingSet.build("w", "C2", np.zeros((0, 2)), usage_ids=[])
        with pytest.raises(EmptyInputError, match="C2"):
            apd(emb([[1.0, 0.0]]), empty)

    def test_dim_mismatch(self):
        with pytest.raises(DomainError):
            apd(emb([[1.0, 0.0]]), emb([[1.0, 0.0, 0.0]], "C2"))

    def test_canberra_variant_matches_brute_force(self):
        rng = np.random.default_rng(1)
        rows1 = rng.normal(size=(4, 3))
        rows2 = rng.normal(size=(5, 3))
        expected = brute_force_apd(rows1, rows2, canberra_distance)
        score = apd(emb(rows1), emb(rows2, "C2"), DistanceKind.CANBERRA)
        assert score.value == pytest.approx(expected, rel=1e-9)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(2)
        for trial in range(10):
            rows1 = rng.normal(size=(rng.integers(1, 6), 4)) + 2.0
            rows2 = rng.normal(size=(rng.integers(1, 6), 4)) + 2.0
            a = apd(emb(rows1), emb(rows2, "C2", prefix="p2")).value
            b = apd(emb(rows2, "C2", prefix="p2"), emb(rows1)).value
            assert a == b  # fsum reduction is order-independent

    @given(st.floats(min_value=0.1, max_value=50.0))
    def test_scale_invariance_with_cosine(self, c):
        rng = np.random.default_rng(3)
        rows1 = rng.normal(size=(3, 4)) + 2.0
        rows2 = rng.normal(size=(4, 4)) + 2.0
        a = apd(emb(rows1), emb(rows2, "C2")).value
        b = apd(emb(c * rows1), emb(c * rows2, "C2")).value
        assert abs(a - b) < 1e-12

    def test_singleton_equals_plain_distance(self):
        u, v = [0.3, 1.7, 0.2], [1.1, 0.4, 0.9]
        assert apd(emb([u]), emb([v], "C2")).value == pytest.approx(
            cosine_distance(u, v), abs=1e-15
        )


class TestPrt:
    def test_identical_sets(self):
        rows = [[1.0, 2.0], [3.0, 1.0]]
        assert prt(emb(rows), emb(rows, "C2")).value == 0.0

    def test_orthogonal_singletons(self):
        assert prt(emb([[1.0, 0.0]]), emb([[0.0, 1.0]], "C2")).value == 1.0

    def test_hand_evaluated_prototype(self):
        phi1 = emb([[2.0, 0.0], [0.0, 2.0]])  # prototype (1, 1)
        phi2 = emb([[1.0, 0.0]], "C2")
        expected = 1.0 - 1.0 / math.sqrt(2.0)
        assert prt(phi1, phi2).value == pytest.approx(expected, abs=1e-12)

    def test_zero_prototype_rejected(self):
        phi1 = emb([[1.0, 0.0], [-1.0, 0.0]])  # mean is the zero vector
        with pytest.raises(DomainError):
            prt(phi1, emb([[1.0, 0.0]], "C2"))

    def test_self_zero(self):
        rng = np.random.default_rng(4)
        rows = rng.normal(size=(6, 5)) + 1.5
        assert prt(emb(rows), emb(rows.copy(), "C2")).value == 0.0
