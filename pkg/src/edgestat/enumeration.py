"""Counting k-subsets by induced edge count, exactly and by sampling.

The exact engine walks all k-subsets in revolving-door order, so consecutive
subsets differ by one swapped vertex and e(A), m(A) are patched rather than
recomputed.  Work is split by the smallest vertex of the subset; each piece
is independent and the (l, m) tables are merged by addition.

Sampling uses numpy's Philox bit generator.  Samples are drawn in fixed
blocks and block ``b`` uses ``Philox(seed).jumped(b)``, so the draws do not
depend on how blocks are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from statistics import NormalDist
from typing import Callable, Iterator, Optional

import numpy as np

from .exact import Real, ceil_real, floor_real
from .hypercore import (
    MAX_VERTICES,
    Hypergraph,
    HypergraphError,
    bits,
    covered_mask,
    edges_within_mask,
    popcount,
)

#: Default cap on the number of subsets the exact engine will visit.
DEFAULT_CEILING = 20_000_000
#: Rough pure-Python throughput used in refusal messages (subsets per second).
_RATE = 400_000

BLOCK = 4096


class WorkTooLarge(RuntimeError):
    """Raised when an exhaustive computation would exceed the work ceiling."""


def work_ceiling() -> int:
    raw = os.environ.get("EDGESTAT_CEILING")
    if raw:
        try:
            return int(float(raw))
        except ValueError:
            raise ValueError(f"EDGESTAT_CEILING={raw!r} is not a number") from None
    return DEFAULT_CEILING


def check_work(units: int, what: str, ceiling: Optional[int] = None) -> None:
    ceiling = work_ceiling() if ceiling is None else ceiling
    if units > ceiling:
        secs = units / _RATE
        raise WorkTooLarge(
            f"{what} needs about {units:.3g} steps (~{secs:.3g} s), above the ceiling "
            f"{ceiling:.3g}; raise EDGESTAT_CEILING to force it"
        )


def _check_nk(H: Hypergraph, k: int) -> None:
    if not isinstance(k, int) or k < 0:
        raise HypergraphError(f"k must be a nonnegative integer, got {k!r}")
    if k > H.n:
        raise HypergraphError(f"k={k} exceeds the vertex count n={H.n}")
    if H.n > MAX_VERTICES:
        raise HypergraphError(
            f"exhaustive enumeration supports at most {MAX_VERTICES} vertices (n={H.n})"
        )


# ---------------------------------------------------------------- revolving door

def _door_steps(n: int, t: int) -> Iterator[tuple[int, int]]:
    """Swaps ``(out, in)`` of Knuth's Algorithm R for 0 < t < n, from {0..t-1}."""
    c = list(range(t)) + [n]  # c[i] is Knuth's c_{i+1}; c[t] = n is a sentinel
    odd = t % 2 == 1
    while True:
        if odd:
            x = c[0]
            if x + 1 < c[1]:
                c[0] = x + 1
                yield x, x + 1
                continue
            j, state = 2, 4
        else:
            x = c[0]
            if x > 0:
                c[0] = x - 1
                yield x, x - 1
                continue
            j, state = 2, 5
        while True:
            if j > t:
                return
            if state == 4:
                # c_j == c_{j-1} + 1
                x = c[j - 2]
                if c[j - 1] >= j:
                    c[j - 1] = x
                    c[j - 2] = j - 2
                    yield x + 1, j - 2
                    break
                j, state = j + 1, 5
            else:
                # c_{j-1} == j - 2
                y = c[j - 1]
                if y + 1 < c[j]:
                    c[j - 2] = y
                    c[j - 1] = y + 1
                    yield j - 2, y + 1
                    break
                j, state = j + 1, 4


def revolving_door_swaps(n: int, k: int) -> Iterator[tuple[int, int]]:
    """``(removed, added)`` pairs walking all k-subsets of range(n) from {0..k-1}."""
    if 0 < k < n:
        yield from _door_steps(n, k)


def revolving_door(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All k-subsets of ``range(n)`` in revolving-door order (Knuth, Algorithm R).

    Consecutive subsets differ in exactly one element.
    """
    if k < 0 or k > n:
        return
    cur = set(range(k))
    yield tuple(sorted(cur))
    for out, inn in revolving_door_swaps(n, k):
        cur.remove(out)
        cur.add(inn)
        yield tuple(sorted(cur))


# ---------------------------------------------------------------- distributions

@dataclass
class JointDistribution:
    """Exact counts of k-subsets by (edge count, non-isolated count)."""

    n: int
    k: int
    counts: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def marginal(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (l, _m), c in sorted(self.counts.items()):
            out[l] = out.get(l, 0) + c
        return out

    def count(self, l: int, m: Optional[int] = None) -> int:
        if m is None:
            return sum(c for (ll, _), c in self.counts.items() if ll == l)
        return self.counts.get((l, m), 0)

    def probability(self, l: int) -> Fraction:
        return Fraction(self.count(l), math.comb(self.n, self.k))

    def merge(self, other: "JointDistribution") -> "JointDistribution":
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("cannot merge distributions with different (n, k)")
        out = Counter(self.counts)
        out.update(other.counts)
        return JointDistribution(self.n, self.k, dict(out))

    def sorted_items(self):
        return sorted((l, m, c) for (l, m), c in self.counts.items() if c)

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "counts": [[l, m, str(c)] for l, m, c in self.sorted_items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "JointDistribution":
        counts = {}
        for l, m, c in obj["counts"]:
            counts[(int(l), int(m))] = int(c)
        return cls(int(obj["n"]), int(obj["k"]), counts)

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        return cls.from_json_obj(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "m", "count"])
        for l, m, c in self.sorted_items():
            w.writerow([l, m, c])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n: int, k: int) -> "JointDistribution":
        rows = list(csv.reader(io.StringIO(text)))
        counts = {(int(l), int(m)): int(c) for l, m, c in rows[1:]}
        return cls(n, k, counts)

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (self.n, self.k, self.sorted_items()) == (other.n, other.k, other.sorted_items())


# ---------------------------------------------------------------- exact engine

def _walk_piece(H: Hypergraph, k: int, first: Optional[int],
                visit: Optional[Callable] = None) -> Counter:
    """Count (e, m) over k-subsets whose smallest vertex is ``first``.

    ``first=None`` walks all k-subsets.  ``visit(mask, e, m)`` is called for
    every subset when given.
    """
    n = H.n
    if first is None:
        base, pool, t = 0, list(range(n)), k
    else:
        base, pool, t = 1 << first, list(range(first + 1, n)), k - 1
    table: Counter = Counter()
    if t < 0 or t > len(pool):
        return table
    # cnt[w]: number of edges inside the current set that contain w
    cnt = [0] * n
    cur = base
    for v in pool[:t]:
        cur |= 1 << v
    e = 0
    for ed in H.edges:
        if ed & cur == ed:
            e += 1
            for w in bits(ed):
                cnt[w] += 1
    m = sum(1 for w in range(n) if cnt[w])
    table[(e, m)] += 1
    if visit is not None:
        visit(cur, e, m)
    if t == 0 or t == len(pool):
        return table
    steps = _door_steps(len(pool), t)
    if H.is_graph:
        _walk_graph(H, pool, steps, cur, e, m, cnt, table, visit)
    else:
        _walk_hyper(H, pool, steps, cur, e, m, cnt, table, visit)
    return table


def _walk_graph(H, pool, steps, cur, e, m, cnt, table, visit):
    adj = H.adjacency
    for oi, ii in steps:
        u = pool[oi]
        cur &= ~(1 << u)
        nb = adj[u] & cur
        if nb:
            e -= nb.bit_count()
            m -= 1
            cnt[u] = 0
            while nb:
                low = nb & -nb
                w = low.bit_length() - 1
                nb ^= low
                c = cnt[w] - 1
                cnt[w] = c
                if not c:
                    m -= 1
        v = pool[ii]
        nb = adj[v] & cur
        cur |= 1 << v
        if nb:
            d = nb.bit_count()
            e += d
            m += 1
            cnt[v] = d
            while nb:
                low = nb & -nb
                w = low.bit_length() - 1
                nb ^= low
                c = cnt[w]
                if not c:
                    m += 1
                cnt[w] = c + 1
        table[(e, m)] += 1
        if visit is not None:
            visit(cur, e, m)


def _walk_hyper(H, pool, steps, cur, e, m, cnt, table, visit):
    inc = [[(ed, bits(ed)) for ed in lst] for lst in H.incidence]
    for oi, ii in steps:
        u = pool[oi]
        bu = 1 << u
        cur &= ~bu
        for ed, verts in inc[u]:
            if ed & cur == ed ^ bu:
                # edge was inside before the removal
                e -= 1
                for w in verts:
                    cnt[w] -= 1
                    if cnt[w] == 0:
                        m -= 1
        v = pool[ii]
        cur |= 1 << v
        for ed, verts in inc[v]:
            if ed & cur == ed:
                e += 1
                for w in verts:
                    if cnt[w] == 0:
                        m += 1
                    cnt[w] += 1
        table[(e, m)] += 1
        if visit is not None:
            visit(cur, e, m)


def _piece_task(args):
    H, k, first = args
    return _walk_piece(H, k, first)


def exact_joint_distribution(H: Hypergraph, k: int, jobs: int = 1,
                             ceiling: Optional[int] = None) -> JointDistribution:
    """Exact (l, m) table over all k-subsets of ``H``."""
    _check_nk(H, k)
    total = math.comb(H.n, k)
    check_work(total, f"exact enumeration of C({H.n},{k}) subsets", ceiling)
    if k == 0:
        return JointDistribution(H.n, 0, {(0, 0): 1})
    firsts = list(range(0, H.n - k + 1))
    tasks = [(H, k, f) for f in firsts]
    merged: Counter = Counter()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_piece_task, tasks):
                merged.update(part)
    else:
        for t in tasks:
            merged.update(_piece_task(t))
    dist = JointDistribution(H.n, k, {key: v for key, v in merged.items() if v})
    assert dist.total == total
    return dist


def naive_joint_distribution(H: Hypergraph, k: int) -> JointDistribution:
    """Reference enumerator: recompute e and m from scratch for every subset."""
    _check_nk(H, k)
    table: Counter = Counter()
    for comb in combinations(range(H.n), k):
        inside = [set(ed) for ed in H.edge_tuples if set(ed) <= set(comb)]
        e = len(inside)
        m = len(set().union(*inside)) if inside else 0
        table[(e, m)] += 1
    return JointDistribution(H.n, k, dict(table))


def I_value(H: Hypergraph, k: int, l: int, jobs: int = 1) -> Fraction:
    """Probability that a uniform k-subset spans exactly ``l`` edges."""
    return exact_joint_distribution(H, k, jobs=jobs).probability(l)


def count_with_m_range(H: Hypergraph, k: int, l: int, m_lo: Real, m_hi: Real,
                       dist: Optional[JointDistribution] = None) -> int:
    """Number of k-subsets with e(A) = l and m_lo <= m(A) <= m_hi.

    Real endpoints are compared exactly: only integers m with
    ``ceil(m_lo) <= m <= floor(m_hi)`` count.
    """
    if dist is None:
        dist = exact_joint_distribution(H, k)
    lo, hi = ceil_real(m_lo), floor_real(m_hi)
    return sum(c for (ll, m), c in dist.counts.items() if ll == l and lo <= m <= hi)


def _is_forest(H: Hypergraph, mask: int) -> bool:
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for ed in H.edges:
        if ed & mask == ed:
            u, v = bits(ed)
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
    return True


def count_forest_subsets(G: Hypergraph, k: int, l: int) -> int:
    """Number of k-subsets inducing an acyclic graph with exactly ``l`` edges."""
    G.require_graph()
    _check_nk(G, k)
    check_work(math.comb(G.n, k), "forest enumeration", None)
    hits = [0]

    def visit(mask, e, _m):
        if e == l and _is_forest(G, mask):
            hits[0] += 1

    _walk_piece(G, k, None, visit)
    return hits[0]


# ---------------------------------------------------------------- all-subset tables

def all_subset_table(H: Hypergraph) -> tuple[np.ndarray, np.ndarray]:
    """``(e, cov)`` indexed by subset bitmask, for every subset of V(H).

    ``e[mask]`` is e(mask) and ``cov[mask]`` is the bitmask of non-isolated
    vertices of ``mask``.  Needs ``n <= 24``.
    """
    n = H.n
    if n > 24:
        raise WorkTooLarge(f"all-subset tables need n <= 24 (n={n})")
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    e = np.zeros(size, dtype=np.int64)
    cov = np.zeros(size, dtype=np.int64)
    for ed in H.edges:
        inside = (masks & ed) == ed
        e += inside
        cov |= np.where(inside, ed, 0)
    return e, cov


def popcounts(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr.astype(np.uint64)).astype(np.int64)


def joint_from_table(n: int, k: int, e: np.ndarray, cov: np.ndarray) -> JointDistribution:
    """Joint (l, m) table for k-subsets read off an all-subset table."""
    size = e.shape[0]
    masks = np.arange(size, dtype=np.int64)
    sel = popcounts(masks) == k
    ee = e[sel]
    mm = popcounts(cov[sel])
    pairs, cnt = np.unique(np.stack([ee, mm], axis=1), axis=0, return_counts=True)
    counts = {(int(a), int(b)): int(c) for (a, b), c in zip(pairs, cnt)}
    return JointDistribution(n, k, counts)


# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class SampleEstimate:
    estimate: float
    lo: float
    hi: float
    samples: int
    hits: int
    seed: int
    level: float

    def to_json_obj(self) -> dict:
        return {
            "estimate": self.estimate, "lo": self.lo, "hi": self.hi,
            "samples": self.samples, "hits": self.hits, "seed": self.seed,
            "level": self.level,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SampleEstimate":
        return cls(float(obj["estimate"]), float(obj["lo"]), float(obj["hi"]),
                   int(obj["samples"]), int(obj["hits"]), int(obj["seed"]),
                   float(obj["level"]))


def wilson_interval(hits: int, samples: int, level: float) -> tuple[float, float]:
    if samples <= 0:
        raise ValueError("need at least one sample")
    if not 0 < level < 1:
        raise ValueError("confidence level must lie in (0, 1)")
    z = NormalDist().inv_cdf(1 - (1 - level) / 2)
    p = hits / samples
    z2 = z * z
    denom = 1 + z2 / samples
    centre = (p + z2 / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z2 / (4 * samples * samples)) / denom
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed).jumped(block))


def draw_subsets(rng: np.random.Generator, n: int, k: int, size: int) -> np.ndarray:
    """``size`` uniform k-subsets of range(n) as sorted rows of an int64 array."""
    if k == 0:
        return np.zeros((size, 0), dtype=np.int64)
    if k * k < n:
        out = np.empty((size, k), dtype=np.int64)
        filled = 0
        while filled < size:
            want = size - filled
            cand = rng.integers(0, n, size=(want + want // 4 + 8, k))
            cand.sort(axis=1)
            ok = np.all(cand[:, 1:] != cand[:, :-1], axis=1)
            good = cand[ok][:want]
            out[filled:filled + len(good)] = good
            filled += len(good)
        return out
    keys = rng.random((size, n))
    idx = np.argpartition(keys, k - 1, axis=1)[:, :k]
    idx.sort(axis=1)
    return idx.astype(np.int64)


class EdgeCounter:
    """Vectorized induced-edge counting for rows of sorted vertex indices."""

    def __init__(self, H: Hypergraph):
        self.n = H.n
        by_size: dict[int, list[int]] = {}
        for tup in H.edge_tuples:
            by_size.setdefault(len(tup), []).append(self._code(tup))
        self.codes = {s: np.array(sorted(v), dtype=np.int64) for s, v in by_size.items()}

    def _code(self, tup) -> int:
        c = 0
        for v in tup:
            c = c * self.n + v
        return c

    def count(self, rows: np.ndarray) -> np.ndarray:
        size, k = rows.shape
        total = np.zeros(size, dtype=np.int64)
        for s, codes in self.codes.items():
            if s > k or codes.size == 0:
                continue
            for comb in combinations(range(k), s):
                code = np.zeros(size, dtype=np.int64)
                for j in comb:
                    code = code * self.n + rows[:, j]
                pos = np.searchsorted(codes, code)
                pos = np.minimum(pos, codes.size - 1)
                total += codes[pos] == code
        return total


def _sample_block_counts(args):
    H, k, seed, b, size = args
    rows = draw_subsets(block_rng(seed, b), H.n, k, size)
    return EdgeCounter(H).count(rows)


def sample_edge_counts(H: Hypergraph, k: int, samples: int, seed: int,
                       jobs: int = 1) -> np.ndarray:
    """Induced edge counts of ``samples`` uniform k-subsets, reproducible per seed."""
    _check_sampling(H, k, samples)
    tasks = []
    for b in range(0, (samples + BLOCK - 1) // BLOCK):
        tasks.append((H, k, seed, b, min(BLOCK, samples - b * BLOCK)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_sample_block_counts, tasks))
    else:
        parts = [_sample_block_counts(t) for t in tasks]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def sample_subsets(H: Hypergraph, k: int, samples: int, seed: int) -> Iterator[np.ndarray]:
    """Blocks of uniform k-subsets (sorted index rows), same stream as the estimators."""
    _check_sampling(H, k, samples)
    for b in range(0, (samples + BLOCK - 1) // BLOCK):
        yield draw_subsets(block_rng(seed, b), H.n, k, min(BLOCK, samples - b * BLOCK))


def _check_sampling(H: Hypergraph, k: int, samples: int) -> None:
    if not isinstance(samples, int) or samples < 1:
        raise ValueError("samples must be a positive integer")
    if not isinstance(k, int) or not 0 <= k <= H.n:
        raise HypergraphError(f"k={k!r} must lie in 0..n={H.n}")


def monte_carlo_estimate(H: Hypergraph, k: int, l: int, samples: int, seed: int,
                         level: float = 0.99, jobs: int = 1) -> SampleEstimate:
    """Fraction of sampled k-subsets with exactly ``l`` edges, with a Wilson interval."""
    counts = sample_edge_counts(H, k, samples, seed, jobs=jobs)
    hits = int(np.count_nonzero(counts == l))
    lo, hi = wilson_interval(hits, samples, level)
    return SampleEstimate(hits / samples, lo, hi, samples, hits, seed, level)


def estimate_from_hits(hits: int, samples: int, seed: int, level: float) -> SampleEstimate:
    lo, hi = wilson_interval(hits, samples, level)
    return SampleEstimate(hits / samples, lo, hi, samples, hits, seed, level)


def subset_stats(H: Hypergraph, mask: int) -> tuple[int, int]:
    """(e, m) of one subset given as a bitmask."""
    return edges_within_mask(H, mask), popcount(covered_mask(H, mask))
