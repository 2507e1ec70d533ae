import math

import numpy as np
import pytest

from conftest import make_graph, make_usages
from lscd.annotator import (
    ScaleMap,
    build_usage_graph,
    compare_metric,
    graph_gcd,
    scale_map,
    wic_judgments,
    wsi,
)
from lscd.clustering import CorrParams
from lscd.core import Clustering, DomainError, Judgment, UsageInstance
from lscd.metrics import adjusted_rand_index


class TestScaleMap:
    def test_endpoints(self):
        m = ScaleMap.linear(1, 4)
        assert scale_map(1.0, m) == 4.0
        assert scale_map(-1.0, m) == 1.0

    def test_midpoint(self):
        assert scale_map(0.0, ScaleMap.linear(1, 4)) == 2.5

    def test_direct_evaluation(self):
        assert scale_map(0.2, ScaleMap.linear(1, 4)) == pytest.approx(2.8, abs=1e-12)

    def test_raw_passthrough(self):
        assert scale_map(0.37, ScaleMap.raw()) == 0.37

    def test_clamped(self):
        assert scale_map(1.5, ScaleMap.linear(1, 4)) == 4.0

    def test_parse(self):
        assert ScaleMap.parse("linear:1:4") == ScaleMap.linear(1, 4)
        assert ScaleMap.parse("raw") == ScaleMap.raw()
        with pytest.raises(DomainError):
            ScaleMap.parse("log:1:4")
        with pytest.raises(DomainError):
            ScaleMap.linear(4, 1)


class TestWicJudgments:
    def test_identical_embeddings(self):
        store = {"u1": np.array([1.0, 0.0]), "u2": np.array([1.0, 0.0])}
        judgments, sims = wic_judgments([("u1", "u2")], store, "model")
        assert sims == [1.0]
        assert judgments[0].value == 4.0
        assert judgments[0].annotator == "model"

    def test_opposite_embeddings(self):
        store = {"u1": np.array([1.0, 0.0]), "u2": np.array([-1.0, 0.0])}
        judgments, sims = wic_judgments([("u1", "u2")], store, "model")
        assert sims == [-1.0]
        assert judgments[0].value == 1.0

    def test_orthogonal_embeddings(self):
        store = {"u1": np.array([1.0, 0.0]), "u2": np.array([0.0, 1.0])}
        judgments, _ = wic_judgments([("u1", "u2")], store, "model")
        assert judgments[0].value == 2.5

    def test_symmetric_in_pair_order(self):
        rng = np.random.default_rng(0)
        store = {"u1": rng.normal(size=4), "u2": rng.normal(size=4)}
        a, _ = wic_judgments([("u1", "u2")], store, "m")
        b, _ = wic_judgments([("u2", "u1")], store, "m")
        assert a[0].value == b[0].value

    def test_missing_embedding_named(self):
        with pytest.raises(DomainError, match="u9"):
            wic_judgments([("u1", "u9")], {"u1": np.array([1.0, 0.0])}, "m")


class TestBuildUsageGraph:
    def test_mean_edge(self):
        usages = make_usages(2)
        g = build_usage_graph(
            usages,
            [Judgment("u0", "u1", "a", 3.0), Judgment("u0", "u1", "b", 4.0)],
        )
        assert g.weights == {("u0", "u1"): 3.5}

    def test_absent_edges_stay_absent(self):
        usages = make_usages(3)
        g = build_usage_graph(usages, [Judgment("u0", "u1", "a", 2.0)])
        assert set(g.weights) == {("u0", "u1")}

    def test_unordered_pair_aggregation(self):
        usages = make_usages(2)
        g = build_usage_graph(
            usages,
            [Judgment("u0", "u1", "a", 2.0), Judgment("u1", "u0", "b", 4.0)],
        )
        assert g.weights == {("u0", "u1"): 3.0}

    def test_unknown_usage_rejected(self):
        with pytest.raises(DomainError):
            build_usage_graph(make_usages(1), [Judgment("u0", "zz", "a", 2.0)])

    def test_mixed_lemmas_rejected(self):
        usages = make_usages(1) + make_usages(1, lemma="other")
        usages[1] = UsageInstance("u9", "other", "text about other", 11, 16, "C1")
        with pytest.raises(DomainError):
            build_usage_graph(usages, [])


class TestWsi:
    def test_planted_two_senses(self):
        weights = {}
        for i in range(6):
            for j in range(i + 1, 6):
                same = (i < 3) == (j < 3)
                weights[(i, j)] = 4.0 if same else 1.0
        g = make_graph(weights)
        clustering = wsi(g, CorrParams(seed=0))
        gold = Clustering(assignment={f"u{i}": 0 if i < 3 else 1 for i in range(6)})
        assert adjusted_rand_index(clustering, gold) == 1.0

    def test_complete_strong_graph_single_cluster(self):
        weights = {(i, j): 4.0 for i in range(5) for j in range(i + 1, 5)}
        clustering = wsi(make_graph(weights))
        assert clustering.n_clusters == 1

    def test_complete_weak_graph_singletons(self):
        weights = {(i, j): 1.0 for i in range(5) for j in range(i + 1, 5)}
        clustering = wsi(make_graph(weights))
        assert clustering.n_clusters == 5


def two_period_graph(weights, n):
    periods = {i: ("C1" if i < n // 2 else "C2") for i in range(n)}
    return make_graph(weights, periods=periods, n=n)


class TestGraphGcd:
    def test_full_change(self):
        g = two_period_graph({(0, 1): 4.0, (2, 3): 4.0, (0, 2): 1.0}, 4)
        c = Clustering(assignment={"u0": 0, "u1": 0, "u2": 1, "u3": 1})
        assert graph_gcd(g, c, ("C1", "C2")).value == 1.0

    def test_identical_distributions(self):
        g = two_period_graph({(0, 1): 4.0, (2, 3): 4.0}, 4)
        c = Clustering(assignment={"u0": 0, "u1": 1, "u2": 0, "u3": 1})
        assert graph_gcd(g, c, ("C1", "C2")).value == 0.0

    def test_hand_evaluated_sqrt_jsd(self):
        # p1 = (0.5, 0.5), p2 = (1, 0)
        g = two_period_graph({(0, 1): 4.0}, 4)
        c = Clustering(assignment={"u0": 0, "u1": 1, "u2": 0, "u3": 0})
        value = graph_gcd(g, c, ("C1", "C2")).value
        assert value == pytest.approx(0.55793, abs=1e-5)
        assert value == pytest.approx(math.sqrt(0.3112781244591328), abs=1e-12)

    def test_symmetric_in_period_order(self):
        g = two_period_graph({(0, 1): 4.0}, 4)
        c = Clustering(assignment={"u0": 0, "u1": 1, "u2": 0, "u3": 0})
        assert graph_gcd(g, c, ("C1", "C2")).value == graph_gcd(g, c, ("C2", "C1")).value

    def test_cluster_relabeling_invariance(self):
        g = two_period_graph({(0, 1): 4.0}, 4)
        a = Clustering(assignment={"u0": 0, "u1": 1, "u2": 0, "u3": 0})
        b = Clustering(assignment={"u0": 5, "u1": 2, "u2": 5, "u3": 5})
        assert graph_gcd(g, a, ("C1", "C2")).value == graph_gcd(g, b, ("C1", "C2")).value

    def test_empty_period_rejected(self):
        g = make_graph({(0, 1): 4.0}, periods={0: "C1", 1: "C1"})
        c = Clustering(assignment={"u0": 0, "u1": 0})
        with pytest.raises(DomainError):
            graph_gcd(g, c, ("C1", "C2"))


class TestCompareMetric:
    def test_maximal_relatedness_is_zero_change(self):
        g = two_period_graph({(0, 2): 4.0, (1, 3): 4.0}, 4)
        assert compare_metric(g, ("C1", "C2")).value == 0.0

    def test_mean_inversion(self):
        g = two_period_graph({(0, 2): 4.0, (0, 3): 4.0, (1, 2): 2.0}, 4)
        score = compare_metric(g, ("C1", "C2"))
        assert score.value == pytest.approx(4.0 - 10.0 / 3.0, abs=1e-12)
        assert score.meta["mean_relatedness"] == pytest.approx(10.0 / 3.0, abs=1e-12)

    def test_minimal_relatedness(self):
        g = two_period_graph({(0, 2): 1.0, (1, 3): 1.0}, 4)
        assert compare_metric(g, ("C1", "C2")).value == 3.0

    def test_within_period_edges_ignored(self):
        base = two_period_graph({(0, 2): 3.0}, 4)
        extra = two_period_graph({(0, 2): 3.0, (0, 1): 1.0, (2, 3): 4.0}, 4)
        assert compare_metric(base, ("C1", "C2")).value == compare_metric(
            extra, ("C1", "C2")
        ).value

    def test_no_cross_edges_rejected(self):
        g = two_period_graph({(0, 1): 4.0}, 4)
        with pytest.raises(DomainError):
            compare_metric(g, ("C1", "C2"))
