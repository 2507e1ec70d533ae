import itertools

import numpy as np
import pytest

from lscd import _kernels
from lscd.core import Judgment, UsageGraph, UsageInstance


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay the JIT compile cost once, outside any timed assertion
    _kernels.warmup()


def make_usages(n, lemma="w", period="C1"):
    return [
        UsageInstance(f"u{i}", lemma, f"text about {lemma}", 11, 11 + len(lemma), period)
        for i in range(n)
    ]


def make_graph(weights, lemma="w", periods=None, n=None):
    """Graph from {(i, j): weight}; nodes are u0..u<max>. ``periods`` maps
    node index -> period id (default all C1)."""
    if n is None:
        n = max(itertools.chain.from_iterable(weights)) + 1 if weights else 0
    periods = periods or {}
    nodes = [
        UsageInstance(f"u{i}", lemma, f"text about {lemma}", 11, 11 + len(lemma),
                      periods.get(i, "C1"))
        for i in range(n)
    ]
    judgments = [Judgment(f"u{i}", f"u{j}", "a", float(w)) for (i, j), w in weights.items()]
    return UsageGraph.build(lemma, nodes, judgments)


def random_complete_graph(n, rng, lemma="w", p_edge=1.0):
    weights = {}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() <= p_edge:
            weights[(i, j)] = float(rng.uniform(1.0, 4.0))
    return make_graph(weights, lemma=lemma, n=n)
