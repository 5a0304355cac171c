"""Executable forms of the counting devices behind the upper bounds.

Everything here is exact: rational arithmetic for weights and probabilities,
squared-integer comparisons for thresholds like ``eps*sqrt(k)/(4*sqrt(r))``,
and certified intervals (never floats) where an irrational constant remains.

Vertex sets are bitmasks internally; public functions also accept iterables.
The brute-force operations refuse instances above fixed size ceilings with
:class:`~edgestat.enumeration.WorkTooLarge`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundValue, Inapplicable
from .enumeration import WorkTooLarge
from .exact import (E_LOWER, E_UPPER, IV, Real, Root, as_fraction, falling, iv_bounds, iv_of,
                    iv_root, log2_iv)
from .hypercore import (Hypergraph, HypergraphError, PairStats, bits, connected_mask,
                        connected_set, covered_mask, edges_within_mask, neighborhood_masks,
                        pair_counts, popcount)

RHO_MAX_N = 8
PER_SET_MAX_K = 6
TREE_MAX_N = 10
TREE_MAX_A = 6


def _refuse(what: str, limit: str) -> None:
    raise WorkTooLarge(f"{what} is limited to {limit}")


def _mask_of(H: Hypergraph, S) -> int:
    return H.vertex_mask(S)


def _seq_mask(H: Hypergraph, seq: Sequence[int]) -> int:
    m = 0
    for v in seq:
        H.check_vertex(v)
        if m >> v & 1:
            raise HypergraphError(f"vertex {v} repeated in sequence")
        m |= 1 << v
    return m


# ---------------------------------------------------------------- good sequences and weights

class GoodSequences:
    """Good prefixes, Lambda and rho for fixed (H, k, l).

    A prefix is good when it extends to a sequence of k distinct vertices
    spanning exactly ``l`` edges whose last vertex is non-isolated.  For
    ``j < k`` that only depends on the prefix as a set, which is what the
    memo tables key on.
    """

    def __init__(self, H: Hypergraph, k: int, l: int):
        if not 1 <= k <= H.n:
            raise HypergraphError("needs 1 <= k <= n")
        if H.n > RHO_MAX_N:
            _refuse("good-sequence enumeration", f"n <= {RHO_MAX_N}")
        self.H, self.k, self.l = H, k, l
        # every k-set with exactly l edges, with its non-isolated vertices
        self.targets = []
        for T in combinations(range(H.n), k):
            t = 0
            for v in T:
                t |= 1 << v
            if edges_within_mask(H, t) == l:
                cov = covered_mask(H, t)
                if cov:
                    self.targets.append((t, cov))
        self._ext: dict[int, bool] = {}
        self._lam: dict[int, Fraction] = {}

    @property
    def nonempty(self) -> bool:
        return bool(self.targets)

    def extendable(self, s: int) -> bool:
        """Whether a prefix with vertex set ``s`` (|s| < k) is good."""
        got = self._ext.get(s)
        if got is None:
            got = any(t & s == s and (t & ~s) & cov for t, cov in self.targets)
            self._ext[s] = got
        return got

    def is_good(self, seq: Sequence[int]) -> bool:
        s = _seq_mask(self.H, seq)
        j = len(seq)
        if j > self.k:
            return False
        if j == self.k:
            return edges_within_mask(self.H, s) == self.l and \
                bool(covered_mask(self.H, s) >> seq[-1] & 1)
        return self.extendable(s)

    def lam_full(self, s: int) -> Fraction:
        return Fraction(1, popcount(covered_mask(self.H, s)))

    def Lambda(self, s: int) -> Fraction:
        """Sum of lambda over one-step good extensions of a good prefix set ``s``."""
        got = self._lam.get(s)
        if got is not None:
            return got
        j = popcount(s)
        total = Fraction(0)
        for v in range(self.H.n):
            if s >> v & 1:
                continue
            t = s | (1 << v)
            if j + 1 < self.k:
                if self.extendable(t):
                    total += 1
            elif edges_within_mask(self.H, t) == self.l:
                cov = covered_mask(self.H, t)
                if cov >> v & 1:
                    total += Fraction(1, popcount(cov))
        self._lam[s] = total
        return total

    def rho(self, seq: Sequence[int]) -> Fraction:
        if not self.is_good(seq):
            raise HypergraphError("rho is defined on good sequences only")
        out = Fraction(1)
        s = 0
        for i, v in enumerate(seq):
            lam = self.lam_full(s | (1 << v)) if i + 1 == self.k else 1
            out *= lam / self.Lambda(s)
            s |= 1 << v
        return out

    def rho_sums(self) -> list[Fraction]:
        """``sums[j]`` = sum of rho over good j-sequences, j = 1..k (index 0 unused)."""
        if not self.nonempty:
            raise HypergraphError("no good sequence exists")
        sums = [Fraction(0)] * (self.k + 1)
        n, k = self.H.n, self.k

        def walk(s: int, j: int, rho: Fraction):
            lam_total = self.Lambda(s)
            for v in range(n):
                if s >> v & 1:
                    continue
                t = s | (1 << v)
                if j + 1 < k:
                    if not self.extendable(t):
                        continue
                    r = rho / lam_total
                    sums[j + 1] += r
                    walk(t, j + 1, r)
                else:
                    if edges_within_mask(self.H, t) != self.l:
                        continue
                    cov = covered_mask(self.H, t)
                    if not cov >> v & 1:
                        continue
                    sums[k] += rho * Fraction(1, popcount(cov)) / lam_total

        walk(0, 0, Fraction(1))
        return sums


def is_good_sequence(H: Hypergraph, k: int, l: int, prefix: Sequence[int]) -> bool:
    if l < 1:
        return False
    return GoodSequences(H, k, l).is_good(prefix)


def rho_sum_check(H: Hypergraph, k: int, l: int, j: int) -> Fraction:
    """Sum of rho over all good j-sequences (the identity says this is 1)."""
    if not 1 <= j <= k:
        raise HypergraphError("needs 1 <= j <= k")
    if l < 1:
        raise HypergraphError("no good sequence exists for l = 0")
    return GoodSequences(H, k, l).rho_sums()[j]


# ---------------------------------------------------------------- per-set inequality

@dataclass
class PerSetResult:
    lhs: Fraction
    rhs: Fraction
    passed: bool
    last_lambda: Fraction
    C_times_n: Fraction
    lambda_constant: bool


def lambda_from_families(H: Hypergraph, a_prime: int, d: int) -> Fraction:
    """C*n computed from neighbourhood families: sum over outside vertices v with
    |N(v, A')| = d of 1 / (|B + U(N(v, A'))| + 1), B the non-isolated part of A'."""
    b = covered_mask(H, a_prime)
    total = Fraction(0)
    for v in range(H.n):
        if a_prime >> v & 1:
            continue
        fam = neighborhood_masks(H, v, a_prime)
        if len(fam) != d:
            continue
        u = 0
        for x in fam:
            u |= x
        total += Fraction(1, popcount(b | u) + 1)
    return total


def per_set_rho_bound(H: Hypergraph, A, v_k: int, k: int, l: int, r: int,
                      gs: Optional[GoodSequences] = None) -> PerSetResult:
    """Sum of rho over labelings of A - {v_k} against the lower bound
    (1/m(A)) (k - r l)/k e k!/n^k, with e replaced by a rational upper bound
    so a pass is certified."""
    a = _mask_of(H, A)
    if popcount(a) != k:
        raise HypergraphError("needs |A| = k")
    if k > PER_SET_MAX_K:
        _refuse("per-set rho enumeration", f"k <= {PER_SET_MAX_K}")
    if not (1 <= l and r * l < k):
        raise HypergraphError("needs 1 <= l < k/r")
    if H.rank > r:
        raise HypergraphError("hypergraph rank exceeds r")
    if edges_within_mask(H, a) != l:
        raise HypergraphError("needs e(A) = l")
    cov = covered_mask(H, a)
    if not (a >> v_k & 1) or not (cov >> v_k & 1):
        raise HypergraphError("v_k must be a non-isolated vertex of A")
    gs = gs or GoodSequences(H, k, l)
    mA = popcount(cov)
    a_prime = a & ~(1 << v_k)
    rest = bits(a_prime)
    lhs = Fraction(0)
    for order in permutations(rest):
        s = 0
        denom = Fraction(1)
        for v in order:
            denom *= gs.Lambda(s)
            s |= 1 << v
        denom *= gs.Lambda(s)
        lhs += Fraction(1, mA) / denom
    last = gs.Lambda(a_prime)
    d = sum(1 for e in H.incidence[v_k] if e & a == e)
    cn = lambda_from_families(H, a_prime, d)
    rhs = Fraction(1, mA) * Fraction(k - r * l, k) * E_UPPER * \
        Fraction(math.factorial(k), H.n ** k)
    return PerSetResult(lhs, rhs, lhs >= rhs, last, cn, last == cn)


def lambda_labeling_values(H: Hypergraph, A, v_k: int, k: int, l: int,
                           gs: Optional[GoodSequences] = None) -> set:
    """Lambda(v_1..v_{k-1}) over every labeling of A - {v_k}, recomputed per
    labeling from the sequence itself (the identity says one value)."""
    a = _mask_of(H, A)
    a_prime = a & ~(1 << v_k)
    gs = gs or GoodSequences(H, k, l)
    values = set()
    for order in permutations(bits(a_prime)):
        total = Fraction(0)
        for v in range(H.n):
            if a_prime >> v & 1:
                continue
            seq = list(order) + [v]
            if gs.is_good(seq):
                total += gs.lam_full(a_prime | (1 << v))
        values.add(total)
    return values


# ---------------------------------------------------------------- pleasant / nice pairs

def pleasant_threshold(eps, k: int, r: int) -> Root:
    """eps * sqrt(k) / (4 sqrt(r))"""
    eps = as_fraction(eps)
    return Root(eps * eps * k / (16 * r))


def _threshold(threshold) -> Real:
    if isinstance(threshold, Root):
        return threshold
    return as_fraction(threshold)


@dataclass
class PairClassification:
    A: tuple
    B: tuple
    stats: PairStats
    flavor: str
    threshold: str
    conditions: dict
    verdict: str

    def to_json_obj(self) -> dict:
        return {
            "A": list(self.A), "B": list(self.B), "flavor": self.flavor,
            "threshold": self.threshold, "h": self.stats.h, "m": self.stats.m,
            "f": self.stats.f, "conditions": dict(self.conditions), "verdict": self.verdict,
        }


def _pair_conditions(H: Hypergraph, a: int, b: int, k: int, l: int, r: int,
                     flavor: str, t: Real) -> tuple[dict, int, int]:
    h, m = pair_counts(H, a, b)
    f = m - h
    size = popcount(a & ~b)
    c1 = popcount(a) == k and edges_within_mask(H, a) == l
    if flavor == "pleasant":
        bar = pleasant_threshold(t, k, r)
        conds = {"i": c1, "ii": f == 0, "iii": bar <= h, "iv": bar <= size - h}
    elif flavor == "nice":
        conds = {
            "i": c1,
            "ii": _le(t, h) and 4 * h * h <= k,
            "iii": size * size >= 4 * k * f * f,
            "iv": size * size >= k,
        }
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return conds, h, m


def _le(t: Real, x: int) -> bool:
    if isinstance(t, Root):
        return t <= x
    return t <= x


def classify_pair(H: Hypergraph, A, B, k: int, l: int, r: int, flavor: str,
                  threshold) -> PairClassification:
    """Condition-by-condition check of the eps-pleasant (threshold = eps) or
    z-nice (threshold = z) definition."""
    a = _mask_of(H, A)
    b = _mask_of(H, B)
    if b & ~a:
        raise HypergraphError("B must be a subset of A")
    if popcount(a) != k:
        raise HypergraphError("needs |A| = k")
    t = _threshold(threshold)
    if flavor == "pleasant" and not (0 < t < Fraction(1, 2)):
        raise HypergraphError("pleasant pairs need 0 < eps < 1/2")
    if flavor == "nice" and not t > 0:
        raise HypergraphError("nice pairs need z > 0")
    conds, h, m = _pair_conditions(H, a, b, k, l, r, flavor, t)
    ok = all(conds.values())
    verdict = flavor if ok else "neither"
    stats = PairStats(frozenset(bits(a)), frozenset(bits(b)), h, m)
    return PairClassification(tuple(bits(a)), tuple(bits(b)), stats, flavor,
                              _fmt(t), conds, verdict)


def _fmt(t) -> str:
    if isinstance(t, Root):
        q = t.square
        return f"sqrt({q})"
    q = as_fraction(t)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def is_pair(H: Hypergraph, a: int, b: int, k: int, l: int, r: int, flavor: str, t: Real) -> bool:
    conds, _, _ = _pair_conditions(H, a, b, k, l, r, flavor, t)
    return all(conds.values())


def partner_bound(flavor: str, threshold, k: int, r: int, n: int, a: int) -> BoundValue:
    """2 r^{1/4} eps^{-1/2} k^{-1/4} n^a/a!  or  (4/3) z^{-1/2} n^a/a!"""
    t = _threshold(threshold)
    scale = Fraction(n ** a, math.factorial(a))
    if flavor == "pleasant":
        x = 2 * iv_root(IV.mpf(r), 4) / IV.sqrt(iv_of(t)) / iv_root(IV.mpf(k), 4)
    else:
        x = IV.mpf(4) / 3 / IV.sqrt(iv_of(t))
    return BoundValue.from_iv(x).scale(scale)


def partner_sets(H: Hypergraph, b: int, k: int, l: int, r: int, flavor: str, t) -> list[int]:
    """All A containing B with (A, B) pleasant / nice, as bitmasks."""
    t = _threshold(t)
    size_b = popcount(b)
    if size_b > k:
        return []
    outside = [v for v in range(H.n) if not b >> v & 1]
    out = []
    for extra in combinations(outside, k - size_b):
        a = b
        for v in extra:
            a |= 1 << v
        if is_pair(H, a, b, k, l, r, flavor, t):
            out.append(a)
    return out


def count_partner_sets(H: Hypergraph, B, k: int, l: int, r: int, flavor: str,
                       threshold) -> tuple[int, BoundValue, bool]:
    b = _mask_of(H, B)
    if popcount(b) > k:
        raise HypergraphError("needs |B| <= k")
    count = len(partner_sets(H, b, k, l, r, flavor, threshold))
    bound = partner_bound(flavor, threshold, k, r, H.n, k - popcount(b))
    return count, bound, count <= bound.lo


# ---------------------------------------------------------------- random B lemmas

@dataclass
class RandomBResult:
    lemma: str
    applicable: bool
    side_conditions: bool
    reason: str
    counts_by_size: dict
    p: Optional[str] = None
    probability: Optional[BoundValue] = None
    floor: Optional[Fraction] = None

    @property
    def meets_floor(self) -> Optional[bool]:
        if self.probability is None or self.floor is None:
            return None
        return self.probability.lo >= self.floor

    def to_json_obj(self) -> dict:
        out = {
            "lemma": self.lemma, "applicable": self.applicable,
            "side_conditions": self.side_conditions, "reason": self.reason,
            "counts_by_size": {str(s): c for s, c in sorted(self.counts_by_size.items())},
        }
        if self.p is not None:
            out["p"] = self.p
        if self.probability is not None:
            out["probability_lo"] = str(self.probability.lo)
            out["probability_hi"] = str(self.probability.hi)
            out["probability_approx"] = f"{float(self.probability):.12g}"
        if self.floor is not None:
            out["floor"] = str(self.floor)
        return out


RANDOM_B_LEMMAS = ("pleasant", "nice_small", "nice_mid")


def random_B_success(H: Hypergraph, A, k: int, l: int, r: int, lemma: str,
                     param) -> RandomBResult:
    """Probability that (A, B) is pleasant / nice when B keeps each vertex of A
    independently with the lemma's probability p.

    ``param`` is eps for ``pleasant`` and c for ``nice_small`` / ``nice_mid``.
    The count of successful B is exact per |B|; the probability is the exact
    polynomial in p evaluated as a certified interval (p can be irrational).
    """
    if lemma not in RANDOM_B_LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}")
    a = _mask_of(H, A)
    if popcount(a) != k:
        raise HypergraphError("needs |A| = k")
    if k > 20:
        _refuse("exact random-B summation", "|A| <= 20")
    param = as_fraction(param)
    mA = popcount(covered_mask(H, a))
    eA = edges_within_mask(H, a)
    sqrt_k = Root(k)
    reasons = []
    if lemma == "pleasant":
        eps = param
        flavor, t = "pleasant", eps
        p_iv = 1 - 1 / (2 * IV.sqrt(IV.mpf(r)) * IV.sqrt(IV.mpf(k)))
        p_text = f"1 - 1/(2 sqrt({r}) sqrt({k}))"
        floor = Fraction(1, 2)
        hyp = 0 < eps < Fraction(1, 2) and eps * k <= mA <= (1 - eps) * k
        side = eps * eps * k >= 2 ** 12 * r
    elif lemma == "nice_small":
        c = param
        flavor, t = "nice", c / (32 * r)
        p_q = 1 - Fraction(1, 8 * r)
        p_iv = iv_of(p_q)
        p_text = str(p_q)
        floor = Fraction(1, 4)
        hyp = 0 < c and sqrt_k / 2 > c and c <= mA and sqrt_k / 2 >= mA
        side = c >= 32 * 32 * r
    else:
        c = param
        flavor, t = "nice", sqrt_k / (64 * r)
        if c <= 0:
            raise HypergraphError("needs c > 0")
        p_iv = 1 - IV.sqrt(IV.mpf(k)) / (16 * r * iv_of(c))
        p_text = f"1 - sqrt({k})/(16*{r}*{c})"
        floor = Fraction(1, 4)
        hyp = sqrt_k / 2 <= c and c <= Fraction(k, 32 * r) and c <= mA <= 2 * c
        side = k >= 44 ** 4 * r * r
    if eA != l:
        reasons.append("e(A) != l")
    if not hyp:
        reasons.append("A or the parameter violates the lemma hypothesis")
    if not side:
        reasons.append("side condition fails (desk-scale k)")
    p_lo, p_hi = iv_bounds(p_iv)
    if p_lo < 0 or p_hi > 1:
        return RandomBResult(lemma, False, side, "p is not a probability", {}, p_text)
    counts: dict[int, int] = {}
    members = bits(a)
    for size in range(k + 1):
        c_here = 0
        for chosen in combinations(members, size):
            b = 0
            for v in chosen:
                b |= 1 << v
            if is_pair(H, a, b, k, l, r, flavor, t):
                c_here += 1
        if c_here:
            counts[size] = c_here
    total = IV.mpf(0)
    for size, cnt in counts.items():
        total += cnt * p_iv ** size * (1 - p_iv) ** (k - size)
    prob = BoundValue.from_iv(total) if counts else BoundValue.exact(0)
    applicable = eA == l and hyp
    return RandomBResult(lemma, applicable, side, "; ".join(reasons), counts, p_text,
                         prob, floor)


# ---------------------------------------------------------------- tidy / tame sequences

def tame_block(k: int) -> int:
    """s = floor(sqrt(k)/2)"""
    return math.isqrt(k) // 2


def _sequence_shape(H: Hypergraph, b: int, seq: Sequence[int], k: int, l: int):
    s = _seq_mask(H, seq)
    if s & b:
        raise HypergraphError("sequence must avoid B")
    if len(seq) != k - popcount(b):
        raise HypergraphError("sequence length must be a = k - |B|")
    whole = b | s
    cov = covered_mask(H, whole)
    conn = [connected_mask(H, v, b) for v in seq]
    iso = [not (cov >> v & 1) for v in seq]
    return edges_within_mask(H, whole) == l, conn, iso


def is_tidy(H: Hypergraph, B, seq: Sequence[int], k: int, l: int, r: int,
            eps) -> tuple[bool, Optional[int]]:
    """(tidy?, h).  h is the length of the connected prefix when tidy."""
    b = _mask_of(H, B)
    ok_edges, conn, iso = _sequence_shape(H, b, seq, k, l)
    return _tidy_from_shape(ok_edges, conn, iso, pleasant_threshold(eps, k, r))


def _tidy_from_shape(ok_edges, conn, iso, t: Root):
    if not ok_edges:
        return False, None
    a = len(conn)
    h = sum(conn)
    if not 1 <= h <= a - 1:
        return False, None
    if not all(conn[:h]) or not all(iso[h:]):
        return False, None
    if not (t <= h and t <= a - h):
        return False, None
    return True, h


def is_tame(H: Hypergraph, B, seq: Sequence[int], k: int, l: int, r: int,
            z) -> tuple[bool, Optional[int]]:
    """(tame?, h).  Raises Inapplicable unless s >= 1 and a >= 2s."""
    b = _mask_of(H, B)
    a = k - popcount(b)
    s = tame_block(k)
    if s < 1 or a < 2 * s:
        raise Inapplicable("tame sequences need s >= 1 and a >= 2s")
    ok_edges, conn, iso = _sequence_shape(H, b, seq, k, l)
    return _tame_from_shape(ok_edges, conn, iso, s, _threshold(z))


def _tame_from_shape(ok_edges, conn, iso, s: int, z):
    if not ok_edges:
        return False, None
    a = len(conn)
    if any(conn[: a - s]):
        return False, None
    tail_conn = conn[a - s:]
    h = sum(tail_conn)
    if not (h >= 1 and h <= s and z <= h):
        return False, None
    if not all(tail_conn[:h]) or not all(iso[a - s + h:]):
        return False, None
    return True, h


def tidy_labelings(H: Hypergraph, A, B, k: int, l: int, r: int, flavor: str,
                   threshold) -> int:
    """Number of orderings of A - B that are tidy (or tame)."""
    a = _mask_of(H, A)
    b = _mask_of(H, B)
    rest = bits(a & ~b)
    count = 0
    for order in permutations(rest):
        if flavor == "pleasant":
            ok, _ = is_tidy(H, b, order, k, l, r, threshold)
        else:
            ok, _ = is_tame(H, b, order, k, l, r, threshold)
        count += ok
    return count


@dataclass
class ProcedureTree:
    """Exact law of the sequential uniform procedure over tidy/tame sequences."""

    B: tuple
    k: int
    l: int
    flavor: str
    threshold: str
    n: int
    leaves: dict = field(default_factory=dict)  # sequence -> (probability, h)
    nodes: int = 0

    @property
    def total(self) -> Fraction:
        return sum((p for p, _ in self.leaves.values()), Fraction(0))

    @property
    def a(self) -> int:
        return self.k - len(self.B)

    def set_mass(self) -> dict[int, Fraction]:
        """Probability that B + sequence equals each reachable set A (bitmask)."""
        b = 0
        for v in self.B:
            b |= 1 << v
        out: dict[int, Fraction] = {}
        for seq, (p, _) in self.leaves.items():
            a = b
            for v in seq:
                a |= 1 << v
            out[a] = out.get(a, Fraction(0)) + p
        return out


def leaf_floor(a: int, h: int, n: int) -> Fraction:
    """a^a / (h^h (a-h)^(a-h)) / n^a"""
    return Fraction(a ** a, h ** h * (a - h) ** (a - h) * n ** a)


def procedure_tree(H: Hypergraph, B, k: int, l: int, r: int, flavor: str,
                   threshold) -> ProcedureTree:
    """Build the tree explicitly: enumerate every tidy/tame sequence, group by
    prefix, and give each child of a node equal probability."""
    b = _mask_of(H, B)
    a = k - popcount(b)
    if H.n > TREE_MAX_N or a > TREE_MAX_A:
        _refuse("procedure tree", f"n <= {TREE_MAX_N} and a <= {TREE_MAX_A}")
    if a < 1:
        raise HypergraphError("needs |B| < k")
    t = _threshold(threshold)
    if flavor == "pleasant":
        bar = pleasant_threshold(t, k, r)
    elif flavor == "nice":
        s = tame_block(k)
        if s < 1 or a < 2 * s:
            raise Inapplicable("tame sequences need s >= 1 and a >= 2s")
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    outside = [v for v in range(H.n) if not b >> v & 1]
    conn_b = {v: connected_mask(H, v, b) for v in outside}
    full: list[tuple[tuple, int]] = []
    for chosen in combinations(outside, a):
        whole = b
        for v in chosen:
            whole |= 1 << v
        if edges_within_mask(H, whole) != l:
            continue
        cov = covered_mask(H, whole)
        for order in permutations(chosen):
            conn = [conn_b[v] for v in order]
            iso = [not (cov >> v & 1) for v in order]
            if flavor == "pleasant":
                ok, h = _tidy_from_shape(True, conn, iso, bar)
            else:
                ok, h = _tame_from_shape(True, conn, iso, s, t)
            if ok:
                full.append((order, h))
    if not full:
        raise HypergraphError("no tidy/tame sequence exists for this B")
    children: dict[tuple, set] = {}
    for seq, _ in full:
        for i in range(a):
            children.setdefault(seq[:i], set()).add(seq[i])
    tree = ProcedureTree(tuple(bits(b)), k, l, flavor, _fmt(t), H.n, nodes=len(children))
    for seq, h in full:
        p = Fraction(1)
        for i in range(a):
            p /= len(children[seq[:i]])
        tree.leaves[seq] = (p, h)
    return tree


def aggregate_floor(flavor: str, threshold, k: int, r: int, n: int, a: int) -> BoundValue:
    """Lower bound on the mass of one pleasant/nice A:
    eps^{1/2} k^{1/4} / (2 r^{1/4}) a!/n^a  or  (3/4) sqrt(z) a!/n^a."""
    t = _threshold(threshold)
    scale = Fraction(math.factorial(a), n ** a)
    if flavor == "pleasant":
        x = IV.sqrt(iv_of(t)) * iv_root(IV.mpf(k), 4) / (2 * iv_root(IV.mpf(r), 4))
    else:
        x = IV.mpf(3) / 4 * IV.sqrt(iv_of(t))
    return BoundValue.from_iv(x).scale(scale)


# ---------------------------------------------------------------- degree classes

@dataclass
class DegreePartition:
    low: frozenset
    medium: frozenset
    high: frozenset
    assumptions: dict


def _cmp_real_times_log(x: Fraction, k: int, power: int, y: Fraction) -> int:
    """Sign of x * log2(k)^power - y, decided with certified intervals."""
    lhs = iv_of(x) * log2_iv(k) ** power
    lo, hi = iv_bounds(lhs)
    if hi < y:
        return -1
    if lo > y:
        return 1
    if lo == hi == y:
        return 0
    # only exact ties survive 200 bits here; those occur when log2 k is an integer
    e = k.bit_length() - 1
    if k == 1 << e:
        v = x * e ** power
        return (v > y) - (v < y)
    raise ArithmeticError("interval comparison undecided")


def degree_partition(G: Hypergraph, k: int, C) -> DegreePartition:
    """low: deg <= 10 C n / k; high: deg >= 10 C n / log^2 k; else medium.
    When the thresholds cross (small k) a vertex meeting both is put in low."""
    G.require_graph()
    C = as_fraction(C)
    n = G.n
    if k < 2:
        raise HypergraphError("needs k >= 2")
    low, med, high = set(), set(), set()
    low_bar = Fraction(10) * C * n / k
    for v, d in enumerate(G.degrees):
        if d <= low_bar:
            low.add(v)
        elif _cmp_real_times_log(Fraction(d), k, 2, 10 * C * n) >= 0:
            high.add(v)
        else:
            med.add(v)
    assumptions = {
        "C>=3": C >= 3,
        "k>=1000C": k >= 1000 * C,
        "k>=4log^10k": _cmp_real_times_log(Fraction(4), k, 10, Fraction(k)) <= 0,
    }
    return DegreePartition(frozenset(low), frozenset(med), frozenset(high), assumptions)


def is_interesting(G: Hypergraph, A, k: int, l: int, C,
                   partition: Optional[DegreePartition] = None) -> bool:
    a = _mask_of(G, A)
    if popcount(a) != k:
        raise HypergraphError("needs |A| = k")
    if edges_within_mask(G, a) != l:
        return False
    part = partition or degree_partition(G, k, C)
    if not any(a >> v & 1 for v in part.high):
        return False
    n = G.n
    adj = G.adjacency
    for v in bits(a):
        dev = Fraction(popcount(adj[v] & a)) - Fraction((k - 1) * G.degrees[v], n)
        # |dev| <= sqrt(k log k)  <=>  dev^2 <= k log2 k
        if _cmp_real_times_log(Fraction(k), k, 1, dev * dev) < 0:
            return False
    return True


def hypergeometric_pj(n: int, x: int, k: int, j: int) -> Fraction:
    """C(k, j) (x)_j (n - x)_{k-j} / (n)_k"""
    if not (0 <= j <= k <= n and 0 <= x <= n):
        raise ValueError("needs 0 <= j <= k <= n and 0 <= x <= n")
    return Fraction(math.comb(k, j) * falling(x, j) * falling(n - x, k - j), falling(n, k))


def max_pj_sweep(n: int, k: int, xs) -> tuple[Fraction, int, int]:
    """Largest p_j over 1 <= j <= k-1 and x in ``xs``; returns (value, x, j)."""
    best = (Fraction(-1), -1, -1)
    for x in xs:
        for j in range(1, k):
            p = hypergeometric_pj(n, x, k, j)
            if p > best[0]:
                best = (p, x, j)
    return best


# ---------------------------------------------------------------- m(A) versus e(A)

def envelope_holds(m: int, e: int, r: int) -> Optional[bool]:
    """Whether (m(A), e(A)) lies in the envelope for rank r, exactly.

    Graphs: sqrt(2e) <= m <= 2e when e >= 1.  Rank r >= 3:
    (r/6) e^(1/r) <= m <= r e when e >= 2^(2r).  None when no envelope applies.
    """
    if r == 2:
        if e < 1:
            return None
        return 2 * e <= m * m and m <= 2 * e
    if e < 1 << (2 * r):
        return None
    return r ** r * e <= (6 * m) ** r and m <= r * e


def envelope_violations_table(e: np.ndarray, m: np.ndarray, r: int) -> int:
    """Vectorized :func:`envelope_holds` over arrays; returns the violation count."""
    e = e.astype(object) if r > 2 else e.astype(np.int64)
    m = m.astype(object) if r > 2 else m.astype(np.int64)
    if r == 2:
        on = e >= 1
        bad = on & ((2 * e > m * m) | (m > 2 * e))
    else:
        on = e >= (1 << (2 * r))
        bad = on & ((r ** r * e > (6 * m) ** r) | (m > r * e))
    return int(np.count_nonzero(bad))


def random_rank_subsets(n: int, r: int, density: float, samples: int, seed: int,
                        min_edges: int, size_range: tuple[int, int]):
    """Random rank-r hypergraph (each set of size 1..r kept with probability
    ``density`` scaled by size) and random subsets; yields (H, e, m) arrays for
    the subsets with at least ``min_edges`` induced edges."""
    rng = np.random.Generator(np.random.Philox(seed))
    edges = []
    for s in range(1, r + 1):
        p = density if s == r else density / (4 * (r - s + 1))
        for t in combinations(range(n), s):
            if rng.random() < p:
                edges.append(sum(1 << v for v in t))
    H = Hypergraph.from_edges(n, [bits(x) for x in edges], rank=r)
    E = np.array(H.edges, dtype=np.int64)
    lo, hi = size_range
    es, ms = [], []
    got = 0
    while got < samples:
        block = 4096
        sizes = rng.integers(lo, hi + 1, size=block)
        keys = rng.random((block, n))
        order = np.argsort(keys, axis=1)
        rank_pos = np.argsort(order, axis=1)
        chosen = rank_pos < sizes[:, None]
        masks = (chosen * (1 << np.arange(n, dtype=np.int64))).sum(axis=1)
        inside = (masks[:, None] & E[None, :]) == E[None, :]
        e = inside.sum(axis=1)
        cov = np.bitwise_or.reduce(np.where(inside, E[None, :], 0), axis=1)
        keep = e >= min_edges
        es.append(e[keep])
        ms.append(np.bitwise_count(cov[keep].astype(np.uint64)).astype(np.int64))
        got += int(keep.sum())
    e = np.concatenate(es)[:samples]
    m = np.concatenate(ms)[:samples]
    return H, e, m


# ---------------------------------------------------------------- suites

SUITES = ("rho-identity", "per-set", "pairs", "envelope", "pj", "random-b")
THRESHOLD_GRID = (Fraction(1, 20), Fraction(1, 10), Fraction(1, 5), Fraction(2, 5))


@dataclass
class LemmaRecord:
    lemma: str
    instance: str
    verdict: str  # pass, fail, skip
    lhs: str = ""
    rhs: str = ""
    detail: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"lemma": self.lemma, "instance": self.instance, "verdict": self.verdict,
                "lhs": self.lhs, "rhs": self.rhs, "detail": self.detail}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LemmaRecord":
        return cls(obj["lemma"], obj["instance"], obj["verdict"], obj.get("lhs", ""),
                   obj.get("rhs", ""), obj.get("detail", {}))


def _graph_name(G: Hypergraph) -> str:
    return f"n{G.n}:" + ",".join(str(e) for e in G.edges)


def _attainable(G: Hypergraph, k: int) -> list[int]:
    from .enumeration import all_subset_table, popcounts

    e, _ = all_subset_table(G)
    sel = popcounts(np.arange(1 << G.n, dtype=np.int64)) == k
    return sorted(int(x) for x in np.unique(e[sel]) if x >= 1)


def _rho_graph(G: Hypergraph) -> list[LemmaRecord]:
    out = []
    for k in range(1, G.n + 1):
        for l in _attainable(G, k):
            sums = GoodSequences(G, k, l).rho_sums()[1:]
            ok = all(s == 1 for s in sums)
            out.append(LemmaRecord("rho_identity", f"{_graph_name(G)} k={k} l={l}",
                                   "pass" if ok else "fail", ",".join(map(str, sums)), "1"))
    return out


def _per_set_graph(G: Hypergraph, r: int = 2) -> list[LemmaRecord]:
    out = []
    for k in range(2, min(G.n, PER_SET_MAX_K) + 1):
        for l in _attainable(G, k):
            if r * l >= k:
                continue
            gs = GoodSequences(G, k, l)
            checked = bad = lam_bad = 0
            worst: Optional[Fraction] = None
            for A in combinations(range(G.n), k):
                a = G.vertex_mask(A)
                if edges_within_mask(G, a) != l:
                    continue
                for v in bits(covered_mask(G, a)):
                    res = per_set_rho_bound(G, a, v, k, l, r, gs)
                    checked += 1
                    bad += not res.passed
                    ratio = res.lhs / res.rhs
                    worst = ratio if worst is None or ratio < worst else worst
                    labels = lambda_labeling_values(G, a, v, k, l, gs)
                    if not res.lambda_constant or labels != {res.last_lambda}:
                        lam_bad += 1
            name = f"{_graph_name(G)} k={k} l={l}"
            out.append(LemmaRecord("per_set_rho_bound", name, "pass" if not bad else "fail",
                                   str(worst), "1", {"checked": checked, "violations": bad,
                                                     "lhs_over_rhs_min": str(worst)}))
            out.append(LemmaRecord("lambda_labeling_invariance", name,
                                   "pass" if not lam_bad else "fail", "", "",
                                   {"checked": checked, "violations": lam_bad}))
    return out


def pair_checks(G: Hypergraph, k: int, l: int, r: int, flavor: str, t) -> dict:
    """Every partner-count, labeling-floor, leaf-floor and aggregate-floor check
    for one (G, k, l, flavor, threshold); returns counts and violations."""
    t = _threshold(t)
    res = {"partner": 0, "labeling": 0, "leaf": 0, "aggregate": 0, "trees": 0,
           "inapplicable_trees": 0, "violations": []}
    for size_b in range(0, k):
        for B in combinations(range(G.n), size_b):
            b = G.vertex_mask(B)
            partners = partner_sets(G, b, k, l, r, flavor, t)
            a = k - size_b
            bound = partner_bound(flavor, t, k, r, G.n, a)
            res["partner"] += 1
            if not len(partners) <= bound.lo:
                res["violations"].append(["partner", list(B), len(partners), str(bound.lo)])
            if not partners:
                continue
            if a > TREE_MAX_A:
                continue
            try:
                tree = procedure_tree(G, b, k, l, r, flavor, t)
            except Inapplicable:
                res["inapplicable_trees"] += 1
                continue
            res["trees"] += 1
            if tree.total != 1:
                res["violations"].append(["tree_total", list(B), str(tree.total)])
            for seq, (p, h) in tree.leaves.items():
                res["leaf"] += 1
                if p < leaf_floor(a, h, G.n):
                    res["violations"].append(["leaf", list(B), list(seq), str(p)])
            mass = tree.set_mass()
            agg = aggregate_floor(flavor, t, k, r, G.n, a)
            for am in partners:
                h, _ = pair_counts(G, am, b)
                lab = tidy_labelings(G, am, b, k, l, r, flavor, t)
                need = math.factorial(h) * math.factorial(a - h)
                if flavor == "nice":
                    need = Fraction(3, 4) * need
                res["labeling"] += 1
                if lab < need:
                    res["violations"].append(["labeling", list(B), bits(am), lab, str(need)])
                res["aggregate"] += 1
                got = mass.get(am, Fraction(0))
                if not got >= agg.hi:
                    res["violations"].append(["aggregate", list(B), bits(am), str(got),
                                              str(agg.hi)])
    return res


def _pairs_graph(G: Hypergraph, r: int = 2, grid=THRESHOLD_GRID) -> list[LemmaRecord]:
    out = []
    for k in range(2, G.n + 1):
        for l in _attainable(G, k):
            for flavor in ("pleasant", "nice"):
                for t in grid:
                    res = pair_checks(G, k, l, r, flavor, t)
                    viol = res.pop("violations")
                    res["violations"] = viol[:20]
                    res["violation_count"] = len(viol)
                    out.append(LemmaRecord(f"{flavor}_machinery",
                                           f"{_graph_name(G)} k={k} l={l} t={_fmt(t)}",
                                           "pass" if not viol else "fail", "", "", res))
    return out


def _graphs_up_to(max_n: int, min_n: int = 1) -> list[Hypergraph]:
    from .search import graph_catalog

    return [G for n in range(min_n, max_n + 1) for G in graph_catalog(n)]


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(jobs) as pool:
        return list(pool.map(fn, items, chunksize=4))


def _envelope_records(max_n: int, samples: int, seed: int) -> list[LemmaRecord]:
    from .enumeration import all_subset_table, popcounts

    out = []
    for n in range(1, max_n + 1):
        checked = bad = 0
        graphs = 0
        for G in _graphs_up_to(n, n):
            e, cov = all_subset_table(G)
            m = popcounts(cov)
            checked += int(np.count_nonzero(e >= 1))
            bad += envelope_violations_table(e, m, 2)
            graphs += 1
        out.append(LemmaRecord("m_e_envelope", f"all graphs n={n}", "pass" if not bad else "fail",
                               "", "", {"graphs": graphs, "subsets_checked": checked,
                                        "violations": bad}))
    if samples:
        H, e, m = random_rank_subsets(16, 3, 0.35, samples, seed, 64, (10, 16))
        bad = envelope_violations_table(e, m, 3)
        out.append(LemmaRecord("m_e_envelope", f"random rank-3 n=16 seed={seed}",
                               "pass" if not bad else "fail", "", "",
                               {"edges": H.num_edges, "subsets_checked": int(e.shape[0]),
                                "min_e": int(e.min()), "violations": bad}))
    return out


def _pj_records(k: int = 100, n: int = 100_000, tol: Fraction = Fraction(1, 50)) -> list[LemmaRecord]:
    xs = sorted(set(range(0, n + 1, 997)) | set(range(max(0, n // k - 200), n // k + 201)))
    best, bx, bj = max_pj_sweep(n, k, xs)
    total_bad = 0
    for x in xs[::25]:
        if sum(hypergeometric_pj(n, x, k, j) for j in range(k + 1)) != 1:
            total_bad += 1
    limit = iv_bounds(1 / IV.e + iv_of(tol))[0]
    ok = best <= limit and total_bad == 0
    return [LemmaRecord("pj_bound", f"n={n} k={k} grid={len(xs)}", "pass" if ok else "fail",
                        f"{float(best):.12g}", f"{float(limit):.12g}",
                        {"argmax_x": bx, "argmax_j": bj, "sum_to_one_failures": total_bad})]


def _random_b_records(seed: int) -> list[LemmaRecord]:
    """Exact random-B probabilities on small synthetic sets; recorded, the
    floors are not asserted below the side conditions."""
    out = []
    rng = np.random.Generator(np.random.Philox(seed))
    cases = 0
    while cases < 6:
        n = 10
        edges = [t for t in combinations(range(n), 2) if rng.random() < 0.12]
        G = Hypergraph.from_edges(n, edges)
        A = list(range(n))
        a = G.full_mask
        l = edges_within_mask(G, a)
        if l < 1:
            continue
        mA = popcount(covered_mask(G, a))
        for lemma, param in (("pleasant", Fraction(1, 10)), ("nice_small", Fraction(1)),
                             ("nice_mid", Fraction(mA, 2) if mA else Fraction(1))):
            res = random_B_success(G, A, n, l, 2, lemma, param)
            out.append(LemmaRecord(f"random_B_{lemma}", _graph_name(G), "skip" if not
                                   (res.applicable and res.side_conditions) else
                                   ("pass" if res.meets_floor else "fail"),
                                   str(res.probability.lo) if res.probability else "",
                                   str(res.floor) if res.floor is not None else "",
                                   res.to_json_obj()))
        cases += 1
    return out


def run_suite(name: str, max_n: int = 6, jobs: int = 1, seed: int = 0,
              samples: int = 100_000) -> list[LemmaRecord]:
    """Records for one named suite, in a deterministic order."""
    if name == "rho-identity":
        return [r for part in _map(_rho_graph, _graphs_up_to(min(max_n, RHO_MAX_N)), jobs)
                for r in part]
    if name == "per-set":
        return [r for part in _map(_per_set_graph, _graphs_up_to(max_n), jobs) for r in part]
    if name == "pairs":
        return [r for part in _map(_pairs_graph, _graphs_up_to(max_n), jobs) for r in part]
    if name == "envelope":
        return _envelope_records(max(max_n, 1), samples, seed)
    if name == "pj":
        return _pj_records()
    if name == "random-b":
        return _random_b_records(seed)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
