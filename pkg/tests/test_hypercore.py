import pytest
from hypothesis import given, strategies as st

from edgestat.hypercore import (Hypergraph, HypergraphError, edges_within, from_edge_list,
                                from_text, is_connected_to, load, neighborhood_family,
                                pair_stats, save, subset_profile, to_text)

from conftest import graphs, hypergraphs
import oracles


def test_edges_within_examples(k3, p3):
    assert edges_within(k3, [0, 1, 2]) == 3
    assert edges_within(p3, [0, 2]) == 0
    c5 = Hypergraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert edges_within(c5, [0, 1, 3]) == 1


def test_edges_within_rejects_out_of_range(p3):
    with pytest.raises(HypergraphError):
        edges_within(p3, [0, 3])


def test_subset_profile_examples(k3, edge_plus_isolated):
    prof = subset_profile(k3, [0, 1, 2])
    assert (prof.eA, prof.mA) == (3, 3)
    prof = subset_profile(edge_plus_isolated, [0, 1, 2])
    assert (prof.eA, prof.mA) == (1, 2)
    H = Hypergraph.from_edges(5, [(0, 1, 2), (2, 3, 4)], rank=3)
    prof = subset_profile(H, range(5))
    assert (prof.eA, prof.mA) == (2, 5)


def test_neighborhood_family_examples(p3):
    assert neighborhood_family(p3, 1, [0, 2]) == {frozenset({0}), frozenset({2})}
    H = Hypergraph.from_edges(4, [(0, 1)])
    assert neighborhood_family(H, 3, [0, 1, 2]) == frozenset()
    H = Hypergraph.from_edges(4, [(0, 1, 2)], rank=3)
    assert neighborhood_family(H, 0, [1, 2, 3]) == {frozenset({1, 2})}
    with pytest.raises(HypergraphError):
        neighborhood_family(p3, 1, [1, 2])


def test_is_connected_to_examples():
    G = Hypergraph.from_edges(2, [(0, 1)])
    assert is_connected_to(G, 0, [1])
    H = Hypergraph.from_edges(3, [(2,), (0, 1)], rank=2)
    assert is_connected_to(H, 2, [])
    H = Hypergraph.from_edges(3, [(0, 1, 2)], rank=3)
    assert not is_connected_to(H, 0, [1])
    with pytest.raises(HypergraphError):
        is_connected_to(G, 0, [0])


def test_pair_stats_examples(p3, edge_plus_isolated):
    s = pair_stats(p3, [0, 1, 2], [1])
    assert (s.h, s.m, s.f) == (2, 2, 0)
    s = pair_stats(p3, [0, 1, 2], [0, 1, 2])
    assert (s.h, s.m, s.f) == (0, 0, 0)
    s = pair_stats(edge_plus_isolated, [0, 1, 2], [])
    assert (s.h, s.m, s.f) == (0, 2, 2)
    with pytest.raises(HypergraphError):
        pair_stats(p3, [0, 1], [2])


def test_invariants_enforced():
    with pytest.raises(HypergraphError):
        Hypergraph.from_edges(3, [(0, 1, 2)], rank=2)
    with pytest.raises(HypergraphError):
        Hypergraph.from_edges(3, [()])
    with pytest.raises(HypergraphError):
        Hypergraph.from_edges(3, [(0, 3)])
    H = Hypergraph.from_edges(3, [(0, 1), (1, 0), (0, 1)])
    assert H.num_edges == 1


def test_edges_sorted_by_size_then_mask():
    H = Hypergraph.from_edges(4, [(2, 3, 1), (0,), (3, 2), (0, 1)], rank=3)
    sizes = [len(t) for t in H.edge_tuples]
    assert sizes == sorted(sizes)
    assert H.edge_tuples == ((0,), (0, 1), (2, 3), (1, 2, 3))


def test_text_round_trip(tmp_path):
    H = Hypergraph.from_edges(6, [(0, 1, 2), (3, 4), (5,)], rank=3)
    assert from_text(to_text(H)) == H
    path = tmp_path / "h.txt"
    save(H, path, {"kind": "demo"})
    back = load(path)
    assert back == H and back.meta["construction"] == {"kind": "demo"}


def test_edge_list_format(tmp_path):
    G = from_edge_list("# path\n0 1\n1 2\n")
    assert G.n == 3 and G.edge_tuples == ((0, 1), (1, 2))
    path = tmp_path / "g.txt"
    path.write_text("0 1\n1 2\n2 3\n")
    assert load(path).num_edges == 3


def test_load_rejects_rank_violation():
    with pytest.raises(HypergraphError):
        from_text("4 2\n0 1 2\n")


@given(graphs())
def test_graph_envelope(G):
    for A in range(1 << G.n):
        prof = subset_profile(G, A)
        if prof.eA >= 1:
            assert 2 * prof.eA <= prof.mA ** 2 and prof.mA <= 2 * prof.eA


@given(hypergraphs(), st.data())
def test_profile_invariants(H, data):
    A = data.draw(st.sets(st.integers(0, H.n - 1)))
    prof = subset_profile(H, A)
    assert prof.eA == oracles.e_of(H.edge_tuples, A)
    assert prof.mA == oracles.m_of(H.edge_tuples, A)
    assert sum(prof.within_degrees.values()) == sum(
        len(e) for e in H.edge_tuples if set(e) <= A)
    assert prof.mA <= H.rank * prof.eA and prof.mA <= len(A)


@given(hypergraphs(), st.data())
def test_family_size_is_degree(H, data):
    v = data.draw(st.integers(0, H.n - 1))
    W = data.draw(st.sets(st.integers(0, H.n - 1))) - {v}
    fam = neighborhood_family(H, v, W)
    deg = sum(1 for e in H.edge_tuples if v in e and set(e) <= W | {v})
    assert len(fam) == deg
    assert all(len(x) < H.rank for x in fam)


@given(hypergraphs(), st.data())
def test_pair_stats_bounds(H, data):
    A = data.draw(st.sets(st.integers(0, H.n - 1)))
    B = data.draw(st.sets(st.sampled_from(sorted(A)))) if A else set()
    s = pair_stats(H, A, B)
    assert (s.h, s.m) == oracles.pair_hm(H.edge_tuples, A, B)
    assert s.h <= s.m <= min(subset_profile(H, A).mA, len(A - B))

