"""Hypergraphs with edges of bounded size, and the per-subset statistics.

Vertices are ``0..n-1`` and every vertex set is an ``int`` bitmask (bit ``v``
set iff ``v`` is in the set).  Public functions accept either a bitmask or any
iterable of vertex indices.

Graphs are hypergraphs of rank 2 whose edges all have exactly two vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Union

VertexSet = Union[int, Iterable[int]]

#: Largest vertex count accepted by the exhaustive (bitmask enumeration) code.
MAX_VERTICES = 128


class HypergraphError(ValueError):
    """Raised on malformed hypergraphs or out-of-range vertex arguments."""


def popcount(x: int) -> int:
    return x.bit_count()


def bits(mask: int) -> list[int]:
    """Vertices of a bitmask in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _edge_key(mask: int) -> tuple[int, int]:
    return popcount(mask), mask


@dataclass(frozen=True)
class Hypergraph:
    """Immutable hypergraph on vertices ``0..n-1``.

    ``edges`` holds one bitmask per edge, deduplicated and sorted by
    (size, mask).  Every edge is nonempty and has at most ``rank`` vertices.
    """

    n: int
    edges: tuple[int, ...]
    rank: int = 2
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise HypergraphError("vertex count must be nonnegative")
        if self.rank < 1:
            raise HypergraphError("rank bound must be at least 1")
        full = (1 << self.n) - 1
        clean = set()
        for e in self.edges:
            if not isinstance(e, int) or e <= 0:
                raise HypergraphError(f"edge {e!r} is empty or not a bitmask")
            if e & ~full:
                raise HypergraphError(f"edge {bits(e)} has a vertex outside 0..{self.n - 1}")
            if popcount(e) > self.rank:
                raise HypergraphError(
                    f"edge {bits(e)} has size {popcount(e)} > rank bound {self.rank}"
                )
            clean.add(e)
        object.__setattr__(self, "edges", tuple(sorted(clean, key=_edge_key)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]], rank: int | None = None,
                   meta: dict | None = None) -> "Hypergraph":
        """Build from vertex-index edges.  ``rank`` defaults to the largest edge."""
        masks = []
        for e in edges:
            e = list(e)
            if not e:
                raise HypergraphError("edges must be nonempty")
            m = 0
            for v in e:
                if not 0 <= v < n:
                    raise HypergraphError(f"vertex {v} outside 0..{n - 1}")
                if m >> v & 1:
                    raise HypergraphError(f"edge {e} repeats vertex {v}")
                m |= 1 << v
            masks.append(m)
        if rank is None:
            rank = max((popcount(m) for m in masks), default=2)
            rank = max(rank, 2) if all(popcount(m) == 2 for m in masks) else rank
        return cls(n, tuple(masks), rank, dict(meta or {}))

    @classmethod
    def empty(cls, n: int, rank: int = 2) -> "Hypergraph":
        return cls(n, (), rank)

    @classmethod
    def complete(cls, n: int, r: int = 2) -> "Hypergraph":
        """All ``r``-subsets of ``n`` vertices."""
        return cls.from_edges(n, combinations(range(n), r), rank=r)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """``incidence[v]`` lists the edges containing ``v``."""
        inc = [[] for _ in range(self.n)]
        for e in self.edges:
            for v in bits(e):
                inc[v].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.incidence)

    @cached_property
    def is_graph(self) -> bool:
        return self.rank <= 2 and all(popcount(e) == 2 for e in self.edges)

    @cached_property
    def adjacency(self) -> tuple[int, ...]:
        """Neighbour bitmask per vertex (graphs only)."""
        self.require_graph()
        adj = [0] * self.n
        for e in self.edges:
            u, v = bits(e)
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return tuple(adj)

    @cached_property
    def edge_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(bits(e)) for e in self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def require_graph(self) -> None:
        if not self.is_graph:
            raise HypergraphError("operation needs a graph (rank 2, all edges of size 2)")

    def vertex_mask(self, W: VertexSet) -> int:
        """Validate ``W`` against ``0..n-1`` and return its bitmask."""
        if isinstance(W, int):
            if W < 0 or W & ~self.full_mask:
                raise HypergraphError(f"vertex set {bits(abs(W))} leaves 0..{self.n - 1}")
            return W
        m = 0
        for v in W:
            if not isinstance(v, int) or not 0 <= v < self.n:
                raise HypergraphError(f"vertex {v!r} outside 0..{self.n - 1}")
            m |= 1 << v
        return m

    def check_vertex(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise HypergraphError(f"vertex {v!r} outside 0..{self.n - 1}")

    def relabel(self, perm) -> "Hypergraph":
        """Image under the vertex map ``v -> perm[v]``."""
        if sorted(perm) != list(range(self.n)):
            raise HypergraphError("relabelling must be a permutation of 0..n-1")
        out = []
        for e in self.edges:
            m = 0
            for v in bits(e):
                m |= 1 << perm[v]
            out.append(m)
        return Hypergraph(self.n, tuple(out), self.rank)

    def complement(self) -> "Hypergraph":
        """Graph complement (graphs only)."""
        if self.rank != 2 or any(popcount(e) != 2 for e in self.edges):
            raise HypergraphError("complement is defined for graphs only")
        present = set(self.edges)
        out = [(1 << u) | (1 << v) for u, v in combinations(range(self.n), 2)
               if (1 << u) | (1 << v) not in present]
        return Hypergraph(self.n, tuple(out), 2)

    def __repr__(self):
        return f"Hypergraph(n={self.n}, rank={self.rank}, edges={list(self.edge_tuples)})"


@dataclass(frozen=True)
class SubsetProfile:
    subset: frozenset
    eA: int
    mA: int
    within_degrees: dict


@dataclass(frozen=True)
class PairStats:
    A: frozenset
    B: frozenset
    h: int
    m: int

    @property
    def f(self) -> int:
        return self.m - self.h


def edges_within(H: Hypergraph, W: VertexSet) -> int:
    """Number of edges of ``H`` contained in ``W``."""
    w = H.vertex_mask(W)
    return sum(1 for e in H.edges if e & w == e)


def edges_within_mask(H: Hypergraph, w: int) -> int:
    """Unchecked :func:`edges_within` for internal hot loops."""
    return sum(1 for e in H.edges if e & w == e)


def covered_mask(H: Hypergraph, w: int) -> int:
    """Union of the edges inside ``w``: the non-isolated vertices of ``w``."""
    u = 0
    for e in H.edges:
        if e & w == e:
            u |= e
    return u


def non_isolated_count(H: Hypergraph, w: int) -> int:
    return popcount(covered_mask(H, w))


def subset_profile(H: Hypergraph, A: VertexSet) -> SubsetProfile:
    a = H.vertex_mask(A)
    deg = {v: 0 for v in bits(a)}
    e_count = 0
    covered = 0
    for e in H.edges:
        if e & a == e:
            e_count += 1
            covered |= e
            for v in bits(e):
                deg[v] += 1
    return SubsetProfile(frozenset(deg), e_count, popcount(covered), deg)


def neighborhood_family(H: Hypergraph, v: int, W: VertexSet) -> frozenset:
    """The sets ``e - {v}`` over edges ``e`` with ``v in e`` and ``e`` inside ``W + {v}``."""
    H.check_vertex(v)
    w = H.vertex_mask(W)
    if w >> v & 1:
        raise HypergraphError(f"vertex {v} must not lie in W")
    bit = 1 << v
    scope = w | bit
    return frozenset(frozenset(bits(e ^ bit)) for e in H.incidence[v] if e & scope == e)


def neighborhood_masks(H: Hypergraph, v: int, w: int) -> frozenset:
    """Bitmask version of :func:`neighborhood_family` without validation."""
    bit = 1 << v
    scope = w | bit
    return frozenset(e ^ bit for e in H.incidence[v] if e & scope == e)


def is_connected_to(H: Hypergraph, v: int, B: VertexSet) -> bool:
    """True iff some edge ``e`` has ``v in e`` and ``e - {v}`` inside ``B``."""
    H.check_vertex(v)
    b = H.vertex_mask(B)
    if b >> v & 1:
        raise HypergraphError(f"vertex {v} must not lie in B")
    return connected_mask(H, v, b)


def connected_mask(H: Hypergraph, v: int, b: int) -> bool:
    scope = b | (1 << v)
    return any(e & scope == e for e in H.incidence[v])


def connected_set(H: Hypergraph, b: int, within: int | None = None) -> int:
    """Bitmask of vertices outside ``b`` (and inside ``within``) connected to ``b``."""
    cand = (within if within is not None else H.full_mask) & ~b
    out = 0
    for v in bits(cand):
        if connected_mask(H, v, b):
            out |= 1 << v
    return out


def pair_stats(H: Hypergraph, A: VertexSet, B: VertexSet) -> PairStats:
    """h, m and f of the pair ``B <= A``."""
    a = H.vertex_mask(A)
    b = H.vertex_mask(B)
    if b & ~a:
        raise HypergraphError("B must be a subset of A")
    h, m = pair_counts(H, a, b)
    return PairStats(frozenset(bits(a)), frozenset(bits(b)), h, m)


def pair_counts(H: Hypergraph, a: int, b: int) -> tuple[int, int]:
    rest = a & ~b
    covered = covered_mask(H, a)
    m = popcount(rest & covered)
    h = popcount(connected_set(H, b, rest))
    return h, m


# ---------------------------------------------------------------- text formats

def to_text(H: Hypergraph, header: dict | None = None) -> str:
    """Serialize as ``n r`` then one edge per line; ``header`` becomes a
    ``# construction:`` comment line."""
    lines = []
    if header is not None:
        lines.append("# construction: " + json.dumps(header, sort_keys=True))
    lines.append(f"{H.n} {H.rank}")
    for tup in H.edge_tuples:
        lines.append(" ".join(map(str, tup)))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Hypergraph:
    """Parse the ``n r`` format.  A ``# construction:`` header lands in ``meta``."""
    meta = {}
    header = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("construction:"):
                meta["construction"] = json.loads(body[len("construction:"):])
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise HypergraphError(f"non-integer token in line {raw!r}") from None
        if header is None:
            if len(nums) != 2:
                raise HypergraphError("first data line must be 'n r'")
            header = nums
            continue
        edges.append(nums)
    if header is None:
        raise HypergraphError("missing 'n r' header line")
    n, r = header
    return Hypergraph.from_edges(n, edges, rank=r, meta=meta)


def from_edge_list(text: str, n: int | None = None) -> Hypergraph:
    """Parse a plain graph edge list (``u v`` per line, ``#`` comments).

    The vertex count is ``n`` when given, else one more than the largest index.
    """
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HypergraphError(f"edge-list line {raw!r} must hold two vertices")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Hypergraph.from_edges(n, edges, rank=2)


def load(path) -> Hypergraph:
    """Read either format; a first data line with two numbers followed only by
    pairs is ambiguous, so the ``n r`` format is tried first."""
    with open(path) as fh:
        text = fh.read()
    try:
        return from_text(text)
    except HypergraphError:
        return from_edge_list(text)


def save(H: Hypergraph, path, header: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(H, header))
