"""Generators for the block and random constructions that make a given
induced edge count likely.

Every generator returns a :class:`~edgestat.hypercore.Hypergraph` whose
``meta["construction"]`` holds the :class:`ConstructionSpec` as a dict, so a
saved file can be regenerated from its header alone.

Random graphs are drawn as "number of edges ~ Binomial(N, p), then that many
distinct candidate sets uniformly", which has the same law as independent
coin flips per candidate but never materializes all N candidates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from .hypercore import Hypergraph, HypergraphError

KINDS = (
    "gnp_one",
    "bipartite_kminus1",
    "planted_clique",
    "hyper_upclosed",
    "star_forest",
    "matching_gnp",
    "r_clique",
)

#: Refuse to materialize more edges than this.
MAX_EDGES = 5_000_000


@dataclass(frozen=True)
class ConstructionSpec:
    kind: str
    n: int
    k: int
    m: Optional[int] = None
    r: Optional[int] = None
    s: Optional[int] = None
    l: Optional[int] = None
    seed: Optional[int] = None
    allow_round: bool = False

    def to_dict(self) -> dict:
        return {key: v for key, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructionSpec":
        return cls(**d)

    def build(self) -> Hypergraph:
        if self.kind not in KINDS:
            raise HypergraphError(f"unknown construction kind {self.kind!r}")
        if self.kind == "gnp_one":
            return gnp_for_ell_one(self.n, self.k, self._need("seed"))
        if self.kind == "bipartite_kminus1":
            return bipartite_kminus1(self.n, self.k, self.allow_round)
        if self.kind == "planted_clique":
            return planted_clique(self.n, self.k, self._need("m"), self.allow_round)
        if self.kind == "hyper_upclosed":
            return hyper_upclosed(self.n, self.k, self._need("r"), self._need("s"),
                                  self._need("seed"))
        if self.kind == "star_forest":
            return star_forest(self.n, self.k, self._need("l"), self.allow_round)
        if self.kind == "matching_gnp":
            return matching_gnp(self.n, self.k, self._need("l"), self._need("seed"))
        return r_clique(self.n, self.k, self._need("m"), self._need("r"), self.allow_round)

    def _need(self, name):
        v = getattr(self, name)
        if v is None:
            raise HypergraphError(f"construction {self.kind} needs parameter {name}")
        return v


def _tag(H: Hypergraph, spec: ConstructionSpec) -> Hypergraph:
    H.meta["construction"] = spec.to_dict()
    return H


def _part(n: int, num: int, den: int, allow_round: bool, what: str) -> int:
    """``num * n / den`` as an integer; exact unless rounding is allowed."""
    x = Fraction(num * n, den)
    if x.denominator != 1:
        if not allow_round:
            raise HypergraphError(
                f"{what}: {num}*n/{den} = {x} is not an integer (pass allow_round to round)"
            )
        return math.floor(x + Fraction(1, 2))
    return int(x)


def _check_edge_budget(count: int) -> None:
    if count > MAX_EDGES:
        raise HypergraphError(
            f"construction would materialize {count} edges (limit {MAX_EDGES}); "
            "use the exact block formulas instead"
        )


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_sets(rng: np.random.Generator, n: int, s: int, p: Fraction) -> list[tuple[int, ...]]:
    """Each s-subset of range(n) independently with probability ``p``."""
    total = math.comb(n, s)
    if p >= 1:
        _check_edge_budget(total)
        return list(combinations(range(n), s))
    if p <= 0 or total == 0:
        return []
    count = int(rng.binomial(total, float(p)))
    _check_edge_budget(count)
    if count > total // 2:
        everything = list(combinations(range(n), s))
        pick = rng.choice(total, size=count, replace=False)
        return sorted(everything[i] for i in pick)
    chosen: set[tuple[int, ...]] = set()
    while len(chosen) < count:
        want = count - len(chosen)
        draws = rng.integers(0, n, size=(2 * want + 16, s))
        draws.sort(axis=1)
        for row in draws:
            t = tuple(int(x) for x in row)
            if len(set(t)) == s:
                chosen.add(t)
                if len(chosen) == count:
                    break
    return sorted(chosen)


def gnp_for_ell_one(n: int, k: int, seed: int) -> Hypergraph:
    """G(n, p) with p = 1 / C(k, 2)."""
    if k < 2:
        raise HypergraphError("gnp_for_ell_one needs k >= 2")
    if n < k:
        raise HypergraphError("gnp_for_ell_one needs n >= k")
    p = Fraction(1, math.comb(k, 2))
    edges = random_sets(_rng(seed), n, 2, p)
    H = Hypergraph.from_edges(n, edges, rank=2)
    return _tag(H, ConstructionSpec("gnp_one", n, k, seed=seed))


def bipartite_kminus1(n: int, k: int, allow_round: bool = False) -> Hypergraph:
    """Complete bipartite graph with parts n/k (vertices 0..n/k-1) and the rest."""
    if k < 1 or n < 1:
        raise HypergraphError("bipartite_kminus1 needs n, k >= 1")
    a = _part(n, 1, k, allow_round, "bipartite_kminus1")
    _check_edge_budget(a * (n - a))
    edges = [(u, v) for u in range(a) for v in range(a, n)]
    H = Hypergraph.from_edges(n, edges, rank=2)
    return _tag(H, ConstructionSpec("bipartite_kminus1", n, k, allow_round=allow_round))


def planted_clique(n: int, k: int, m: int, allow_round: bool = False) -> Hypergraph:
    """Clique on m*n/k vertices (0..b-1), all other vertices isolated."""
    if not 1 <= m <= k:
        raise HypergraphError("planted_clique needs 1 <= m <= k")
    b = _part(n, m, k, allow_round, "planted_clique")
    _check_edge_budget(math.comb(b, 2))
    H = Hypergraph.from_edges(n, combinations(range(b), 2), rank=2)
    return _tag(H, ConstructionSpec("planted_clique", n, k, m=m, allow_round=allow_round))


def hyper_upclosed(n: int, k: int, r: int, s: int, seed: int) -> Hypergraph:
    """r-uniform hypergraph of all r-sets containing an edge of a random
    s-uniform hypergraph with edge probability 1 / C(k, s)."""
    if s > r:
        raise HypergraphError("hyper_upclosed needs s <= r")
    if not (1 <= s and r <= k <= n):
        raise HypergraphError("hyper_upclosed needs 1 <= s <= r <= k <= n")
    base = random_sets(_rng(seed), n, s, Fraction(1, math.comb(k, s)))
    _check_edge_budget(len(base) * math.comb(n - s, r - s))
    out: set[int] = set()
    for S in base:
        smask = 0
        for v in S:
            smask |= 1 << v
        rest = [v for v in range(n) if not smask >> v & 1]
        for extra in combinations(rest, r - s):
            m = smask
            for v in extra:
                m |= 1 << v
            out.add(m)
    H = Hypergraph(n, tuple(out), r)
    return _tag(H, ConstructionSpec("hyper_upclosed", n, k, r=r, s=s, seed=seed))


def star_forest(n: int, k: int, l: int, allow_round: bool = False) -> Hypergraph:
    """Complete bipartite graph between n/k centres and l*n/k leaves, plus
    (k-l-1)*n/k isolated vertices."""
    if l < 1:
        raise HypergraphError("star_forest needs l >= 1")
    if k < l + 1:
        raise HypergraphError("star_forest needs k >= l + 1")
    c = _part(n, 1, k, allow_round, "star_forest")
    leaves = _part(n, l, k, allow_round, "star_forest")
    if c + leaves > n:
        raise HypergraphError("star_forest parts exceed n")
    _check_edge_budget(c * leaves)
    edges = [(u, v) for u in range(c) for v in range(c, c + leaves)]
    H = Hypergraph.from_edges(n, edges, rank=2)
    return _tag(H, ConstructionSpec("star_forest", n, k, l=l, allow_round=allow_round))


def matching_gnp(n: int, k: int, l: int, seed: int) -> Hypergraph:
    """G(n, p) with p = l / C(k, 2)."""
    if k < 2:
        raise HypergraphError("matching_gnp needs k >= 2")
    if not 1 <= l <= math.comb(k, 2):
        raise HypergraphError("matching_gnp needs 1 <= l <= C(k, 2)")
    edges = random_sets(_rng(seed), n, 2, Fraction(l, math.comb(k, 2)))
    H = Hypergraph.from_edges(n, edges, rank=2)
    return _tag(H, ConstructionSpec("matching_gnp", n, k, l=l, seed=seed))


def r_clique(n: int, k: int, m: int, r: int, allow_round: bool = False) -> Hypergraph:
    """All r-subsets of a block of m*n/k vertices."""
    if m < r:
        raise HypergraphError("r_clique needs m >= r")
    if m > k:
        raise HypergraphError("r_clique needs m <= k")
    b = _part(n, m, k, allow_round, "r_clique")
    _check_edge_budget(math.comb(b, r))
    H = Hypergraph.from_edges(n, combinations(range(b), r), rank=r)
    return _tag(H, ConstructionSpec("r_clique", n, k, m=m, r=r, allow_round=allow_round))


# ---------------------------------------------------------------- exact block laws

def hypergeometric_pmf(n: int, block: int, k: int, b: int) -> Fraction:
    """P[a uniform k-subset of n vertices meets a fixed block of size ``block`` in b]."""
    if not (0 <= block <= n and 0 <= k <= n):
        raise ValueError("need 0 <= block, k <= n")
    if b < 0 or b > k:
        return Fraction(0)
    return Fraction(math.comb(block, b) * math.comb(n - block, k - b), math.comb(n, k))


def block_pushforward(n: int, block: int, k: int, edges_of) -> dict[int, Fraction]:
    """Exact law of the induced edge count when it depends only on the number
    b of sampled block vertices, through ``edges_of(b)``."""
    out: dict[int, Fraction] = {}
    for b in range(0, min(block, k) + 1):
        p = hypergeometric_pmf(n, block, k, b)
        if p:
            l = edges_of(b)
            out[l] = out.get(l, Fraction(0)) + p
    return out


def bipartite_law(n: int, k: int, allow_round: bool = False) -> dict[int, Fraction]:
    a = _part(n, 1, k, allow_round, "bipartite_kminus1")
    return block_pushforward(n, a, k, lambda b: b * (k - b))


def clique_law(n: int, k: int, m: int, r: int = 2, allow_round: bool = False) -> dict[int, Fraction]:
    b0 = _part(n, m, k, allow_round, "clique")
    return block_pushforward(n, b0, k, lambda b: math.comb(b, r))
