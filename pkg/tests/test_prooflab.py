import math
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, strategies as st

from edgestat.bounds import Inapplicable
from edgestat.exact import E_UPPER, Root
from edgestat.hypercore import Hypergraph, HypergraphError, pair_counts
from edgestat.prooflab import (GoodSequences, LemmaRecord, classify_pair, count_partner_sets,
                               degree_partition, envelope_holds, hypergeometric_pj,
                               is_good_sequence, is_interesting, is_tame, is_tidy, leaf_floor,
                               max_pj_sweep, pair_checks, per_set_rho_bound,
                               pleasant_threshold, procedure_tree, random_B_success,
                               rho_sum_check, run_suite, tame_block, tidy_labelings)

from conftest import graphs, hypergraphs
import oracles

P4 = Hypergraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


# ---------------------------------------------------------------- good sequences

def test_good_sequence_examples(edge_plus_isolated):
    H = edge_plus_isolated
    assert is_good_sequence(H, 3, 1, (2, 0, 1))
    assert not is_good_sequence(H, 3, 1, (0, 1, 2))
    assert not is_good_sequence(H, 3, 0, ())
    assert is_good_sequence(H, 3, 1, ())
    assert not is_good_sequence(Hypergraph.empty(4), 3, 1, ())
    with pytest.raises(HypergraphError):
        is_good_sequence(H, 3, 1, (0, 0))


@given(graphs(max_n=5), st.data())
def test_good_prefix_matches_extension_oracle(G, data):
    k = data.draw(st.integers(1, G.n))
    l = data.draw(st.integers(1, 4))
    j = data.draw(st.integers(0, k))
    prefix = tuple(data.draw(st.permutations(range(G.n)))[:j])
    want = any(s[:j] == prefix and oracles.good_full(G.edge_tuples, s, l)
               for s in permutations(range(G.n), k))
    assert is_good_sequence(G, k, l, prefix) == want
    if want and j < k:
        assert oracles.e_of(G.edge_tuples, prefix) < l


def test_rho_identity_examples(edge_plus_isolated):
    for j in (1, 2, 3):
        assert rho_sum_check(edge_plus_isolated, 3, 1, j) == 1
    for j in (1, 2, 3):
        assert rho_sum_check(P4, 3, 1, j) == 1
    # exactly one 3-set with two edges
    assert rho_sum_check(Hypergraph.from_edges(5, [(0, 1), (1, 2)]), 3, 2, 3) == 1
    with pytest.raises(HypergraphError):
        rho_sum_check(P4, 3, 0, 1)


@given(graphs(max_n=5), st.data())
def test_rho_sums_match_definition_oracle(G, data):
    k = data.draw(st.integers(1, G.n))
    l = data.draw(st.integers(1, 4))
    gs = GoodSequences(G, k, l)
    if not gs.nonempty:
        assert not any(oracles.good_full(G.edge_tuples, s, l)
                       for s in permutations(range(G.n), k))
        return
    want = oracles.rho_sums(G.n, G.edge_tuples, k, l)
    assert gs.rho_sums()[1:] == want
    assert all(s == 1 for s in want)


@given(hypergraphs(max_n=5), st.data())
def test_rho_identity_on_hypergraphs(H, data):
    k = data.draw(st.integers(1, H.n))
    l = data.draw(st.integers(1, 3))
    gs = GoodSequences(H, k, l)
    if gs.nonempty:
        assert all(s == 1 for s in gs.rho_sums()[1:])


def test_rho_refuses_large_n():
    with pytest.raises(Exception, match="8"):
        GoodSequences(Hypergraph.empty(9), 3, 1)


# ---------------------------------------------------------------- per-set inequality

def test_per_set_example():
    H = Hypergraph.from_edges(4, [(0, 1)])
    res = per_set_rho_bound(H, (0, 1, 3), 1, 3, 1, 2)
    assert res.passed and res.lambda_constant
    want_rhs = Fraction(1, 2) * Fraction(1, 3) * E_UPPER * Fraction(6, 64)
    assert res.rhs == want_rhs


def test_per_set_n_equals_k():
    H = Hypergraph.from_edges(4, [(0, 1)])
    H = Hypergraph.from_edges(3, [(0, 1)])
    gs = GoodSequences(H, 3, 1)
    res = per_set_rho_bound(H, (0, 1, 2), 1, 3, 1, 2, gs)
    direct = sum(gs.rho(list(o) + [1]) for o in permutations((0, 2)))
    assert res.lhs == direct


def test_per_set_rejections():
    H = Hypergraph.from_edges(4, [(0, 1)])
    with pytest.raises(HypergraphError):
        per_set_rho_bound(H, (0, 1, 3), 3, 3, 1, 2)  # isolated v_k
    with pytest.raises(HypergraphError):
        per_set_rho_bound(H, (0, 2, 3), 2, 3, 1, 2)  # e(A) != l
    with pytest.raises(Exception, match="k <= 6"):
        per_set_rho_bound(Hypergraph.empty(8), tuple(range(7)), 0, 7, 1, 2)


@given(graphs(min_n=3, max_n=6), st.data())
def test_per_set_random(G, data):
    k = data.draw(st.integers(3, min(5, G.n)))
    A = tuple(sorted(data.draw(st.permutations(range(G.n)))[:k]))
    l = oracles.e_of(G.edge_tuples, A)
    if not (1 <= l and 2 * l < k):
        return
    cov = sorted({v for e in G.edge_tuples if set(e) <= set(A) for v in e})
    gs = GoodSequences(G, k, l)
    for v in cov:
        res = per_set_rho_bound(G, A, v, k, l, 2, gs)
        assert res.passed and res.lambda_constant


# ---------------------------------------------------------------- pairs

def test_pleasant_threshold():
    assert pleasant_threshold(Fraction(1, 2), 16, 1) == Root(Fraction(1, 4))
    assert pleasant_threshold(Fraction(1, 2), 16, 1) == Fraction(1, 2)


def test_classify_examples():
    H = Hypergraph.from_edges(6, [(0, 1)])
    c = classify_pair(H, (0, 2, 3, 4), (0,), 4, 2, 2, "pleasant", Fraction(1, 10))
    assert c.verdict == "neither" and not c.conditions["i"]
    c = classify_pair(H, (0, 1, 2, 3), (0, 1, 2, 3), 4, 1, 2, "pleasant", Fraction(1, 10))
    assert not c.conditions["iii"]
    with pytest.raises(HypergraphError):
        classify_pair(H, (0, 1, 2, 3), (5,), 4, 1, 2, "pleasant", Fraction(1, 10))
    # B = both edge endpoints: h = 0, m = 0, f = 0, |A - B| = 2
    c = classify_pair(H, (0, 1, 2, 3), (0, 1), 4, 1, 2, "pleasant", Fraction(1, 10))
    assert c.conditions == {"i": True, "ii": True, "iii": False, "iv": True}
    # B = one endpoint: vertex 1 is connected to B, so h = 1, f = 0
    c = classify_pair(H, (0, 1, 2, 3), (0,), 4, 1, 2, "pleasant", Fraction(1, 10))
    assert c.conditions == {"i": True, "ii": True, "iii": True, "iv": True}
    assert c.verdict == "pleasant"
    # nice with z = 1: h = 1, 4 h^2 <= 4, |A-B|^2 = 9 >= 4 k f^2 = 0, 9 >= 4
    c = classify_pair(H, (0, 1, 2, 3), (0,), 4, 1, 2, "nice", 1)
    assert c.verdict == "nice"
    assert classify_pair(H, (0, 1, 2, 3), (0,), 4, 1, 2, "nice", 2).verdict == "neither"


@given(graphs(min_n=2, max_n=6), st.data())
def test_pair_counts_match_oracle(G, data):
    perm = data.draw(st.permutations(range(G.n)))
    k = data.draw(st.integers(1, G.n))
    A = tuple(sorted(perm[:k]))
    B = tuple(sorted(perm[:data.draw(st.integers(0, k))]))
    assert pair_counts(G, G.vertex_mask(A), G.vertex_mask(B)) == \
        oracles.pair_hm(G.edge_tuples, A, B)


def test_partner_examples():
    H = Hypergraph.empty(6)
    count, bound, ok = count_partner_sets(H, (0,), 4, 1, 2, "pleasant", Fraction(1, 10))
    assert count == 0 and ok
    small = count_partner_sets(H, (0,), 4, 1, 2, "pleasant", Fraction(1, 20))[1]
    large = count_partner_sets(H, (0,), 4, 1, 2, "pleasant", Fraction(2, 5))[1]
    assert small.lo > large.hi
    small = count_partner_sets(H, (0,), 4, 1, 2, "nice", Fraction(1, 20))[1]
    large = count_partner_sets(H, (0,), 4, 1, 2, "nice", Fraction(2, 5))[1]
    assert small.lo > large.hi


# ---------------------------------------------------------------- tidy / tame

def test_tidy_examples():
    H = Hypergraph.from_edges(6, [(0, 1)])
    ok, h = is_tidy(H, (0,), (1, 2, 3), 4, 1, 2, Fraction(1, 10))
    assert ok and h == 1 == pair_counts(H, H.vertex_mask((0, 1, 2, 3)), 1)[0]
    # a vertex connected to B after an unconnected one breaks the pattern
    assert not is_tidy(H, (0,), (2, 1, 3), 4, 1, 2, Fraction(1, 10))[0]
    H2 = Hypergraph.from_edges(6, [(0, 1), (0, 3)])
    assert not is_tidy(H2, (0,), (1, 2, 3), 4, 1, 2, Fraction(1, 10))[0]
    with pytest.raises(HypergraphError):
        is_tidy(H, (0,), (1, 2), 4, 1, 2, Fraction(1, 10))


def test_tame_examples():
    assert tame_block(16) == 2 and tame_block(3) == 0
    H = Hypergraph.from_edges(6, [(0, 1)])
    with pytest.raises(Inapplicable):
        is_tame(H, (0,), (1, 2), 3, 1, 2, 1)  # s = 0
    with pytest.raises(Inapplicable):
        procedure_tree(H, (0, 2, 3), 4, 1, 2, "nice", 1)  # a = 1 < 2s
    ok, h = is_tame(H, (0,), (2, 3, 4, 1), 5, 1, 2, 1)
    # s = 1: the last vertex is the connected one
    assert ok and h == 1
    assert not is_tame(H, (0,), (1, 2, 3, 4), 5, 1, 2, 1)[0]


def test_labeling_floor_small():
    H = Hypergraph.from_edges(7, [(0, 1), (0, 2)])
    A, B = (0, 1, 2, 3, 4), (0,)
    c = classify_pair(H, A, B, 5, 2, 2, "pleasant", Fraction(2, 5))
    assert c.verdict == "pleasant"
    h = c.stats.h
    assert tidy_labelings(H, A, B, 5, 2, 2, "pleasant", Fraction(2, 5)) >= \
        math.factorial(h) * math.factorial(4 - h)


# ---------------------------------------------------------------- procedure tree

def test_tree_one_edge():
    H = Hypergraph.from_edges(5, [(0, 1)])
    tree = procedure_tree(H, (0,), 3, 1, 2, "pleasant", Fraction(1, 10))
    assert tree.total == 1
    for seq, (p, h) in tree.leaves.items():
        assert p >= leaf_floor(len(seq), h, H.n)
    masses = tree.set_mass()
    assert sum(masses.values()) == 1
    assert len(masses) == len({frozenset(s) for s in tree.leaves})


@given(graphs(min_n=3, max_n=5), st.data())
def test_pair_checks_clean(G, data):
    k = data.draw(st.integers(2, G.n))
    l = data.draw(st.integers(1, 3))
    flavor = data.draw(st.sampled_from(["pleasant", "nice"]))
    t = data.draw(st.sampled_from([Fraction(1, 20), Fraction(1, 5), Fraction(2, 5)]))
    assert pair_checks(G, k, l, 2, flavor, t)["violations"] == []


def test_tree_refuses_large():
    with pytest.raises(Exception):
        procedure_tree(Hypergraph.empty(11), (0,), 3, 1, 2, "pleasant", Fraction(1, 10))


# ---------------------------------------------------------------- random B

def test_random_b_examples():
    H = Hypergraph.from_edges(10, [(0, 1), (2, 3)])
    res = random_B_success(H, range(10), 10, 5, 2, "pleasant", Fraction(1, 10))
    assert not res.applicable and res.probability.hi == 0
    res = random_B_success(H, range(10), 10, 2, 2, "pleasant", Fraction(1, 10))
    assert not res.side_conditions and res.meets_floor is not None
    assert sum(res.counts_by_size.values()) <= 2 ** 10
    # brute check of the per-size counts
    for size, cnt in res.counts_by_size.items():
        want = sum(1 for B in combinations(range(10), size)
                   if classify_pair(H, range(10), B, 10, 2, 2, "pleasant",
                                    Fraction(1, 10)).verdict == "pleasant")
        assert cnt == want


# ---------------------------------------------------------------- degree classes

def test_degree_partition_examples():
    G = Hypergraph.from_edges(10, [(i, (i + 1) % 10) for i in range(10)])
    part = degree_partition(G, 100, 3)
    assert part.low == frozenset(range(10))
    star = Hypergraph.from_edges(200, [(0, v) for v in range(1, 200)])
    part = degree_partition(star, 1024, 3)
    assert 0 in part.high and 1 in part.low
    # degree exactly 10 C n / k lands in low: n = 40, k = 20, C = 3 gives 60 > n - 1,
    # so use C = 1/5: bar = 10 * (1/5) * 40 / 20 = 4
    G = Hypergraph.from_edges(40, [(0, v) for v in range(1, 5)])
    assert 0 in degree_partition(G, 20, Fraction(1, 5)).low
    assert degree_partition(G, 20, 3).assumptions["C>=3"]


def test_is_interesting_examples():
    G = Hypergraph.from_edges(8, [(0, 1)])
    assert not is_interesting(G, (0, 2, 3), 3, 1, 3)
    assert not is_interesting(Hypergraph.empty(8), (0, 1, 2), 3, 0, 3)
    hub = Hypergraph.from_edges(64, [(0, v) for v in range(1, 64)])
    part = degree_partition(hub, 16, Fraction(1, 10))
    assert 0 in part.high
    assert is_interesting(hub, (0, 1, 2, 3), 4, 3, Fraction(1, 10)) in (True, False)


# ---------------------------------------------------------------- p_j

def test_pj_examples():
    assert hypergeometric_pj(50, 0, 10, 0) == 1
    assert hypergeometric_pj(50, 0, 10, 3) == 0
    assert hypergeometric_pj(100, 1, 10, 1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        hypergeometric_pj(10, 3, 11, 1)


@given(st.integers(1, 60), st.data())
def test_pj_is_a_law(n, data):
    x = data.draw(st.integers(0, n))
    k = data.draw(st.integers(0, n))
    assert sum(hypergeometric_pj(n, x, k, j) for j in range(k + 1)) == 1
    for j in range(k + 1):
        assert hypergeometric_pj(n, x, k, j) == oracles.hypergeom(n, x, k, j)


def test_pj_sweep_small():
    best, x, j = max_pj_sweep(2000, 100, range(0, 2001, 20))
    assert float(best) <= math.exp(-1) + 0.02
    assert best == hypergeometric_pj(2000, x, 100, j)


# ---------------------------------------------------------------- envelope

def test_envelope_examples():
    assert envelope_holds(2, 1, 2) is True
    assert envelope_holds(3, 1, 2) is False
    assert envelope_holds(0, 0, 2) is None
    assert envelope_holds(10, 63, 3) is None
    assert envelope_holds(10, 64, 3) is True
    assert envelope_holds(2, 64, 3) is True  # (3/6) * 64^(1/3) = 2
    assert envelope_holds(1, 64, 3) is False
    assert envelope_holds(200, 64, 3) is False


@given(hypergraphs(min_n=4, max_n=6), st.data())
def test_graph_envelope_on_random_subsets(H, data):
    G = Hypergraph.from_edges(H.n, [e for e in H.edge_tuples if len(e) == 2])
    A = data.draw(st.permutations(range(G.n)))[:data.draw(st.integers(1, G.n))]
    e = oracles.e_of(G.edge_tuples, A)
    m = oracles.m_of(G.edge_tuples, A)
    assert envelope_holds(m, e, 2) in (None, True)


# ---------------------------------------------------------------- suites

def test_suites_small():
    recs = run_suite("rho-identity", max_n=4)
    assert recs and all(r.verdict == "pass" for r in recs)
    assert all(LemmaRecord.from_json_obj(r.to_json_obj()) == r for r in recs)
    recs = run_suite("per-set", max_n=4)
    assert recs and all(r.verdict == "pass" for r in recs)
    recs = run_suite("envelope", max_n=4, samples=2000)
    assert all(r.verdict == "pass" for r in recs)
    recs = run_suite("random-b", seed=1)
    assert {r.verdict for r in recs} <= {"skip", "pass"}
    with pytest.raises(ValueError):
        run_suite("nope")
