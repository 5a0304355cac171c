import os
from itertools import combinations

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from edgestat.hypercore import Hypergraph

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@st.composite
def graphs(draw, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Hypergraph.from_edges(n, [p for p, k in zip(pairs, keep) if k])


@st.composite
def hypergraphs(draw, min_n=1, max_n=6, r=3):
    n = draw(st.integers(min_n, max_n))
    sets = [c for s in range(1, r + 1) for c in combinations(range(n), s)]
    keep = draw(st.lists(st.integers(0, 5), min_size=len(sets), max_size=len(sets)))
    return Hypergraph.from_edges(n, [c for c, x in zip(sets, keep) if x == 0], rank=r)


@pytest.fixture
def p3():
    return Hypergraph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def c5():
    return Hypergraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])


@pytest.fixture
def k3():
    return Hypergraph.complete(3, 2)


@pytest.fixture
def edge_plus_isolated():
    return Hypergraph.from_edges(3, [(0, 1)])
