"""Maximizing I(G, k, l) over small graphs, exactly and heuristically.

Isomorphism classes are represented by a canonical form computed with
colour refinement plus individualization, pruned by the automorphisms found
along the way.  The search tree depends only on the isomorphism class, so
the smallest leaf certificate is a canonical form.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .enumeration import WorkTooLarge, all_subset_table, exact_joint_distribution, popcounts
from .hypercore import Hypergraph, HypergraphError, bits, from_text, popcount, to_text

#: Known numbers of isomorphism classes, used as a self-check.
GRAPH_COUNTS = {0: 1, 1: 1, 2: 2, 3: 4, 4: 11, 5: 34, 6: 156, 7: 1044, 8: 12346}
UNIFORM3_COUNTS = {0: 1, 1: 1, 2: 1, 3: 2, 4: 5, 5: 34}
EXHAUSTIVE_MAX_N = {2: 8, 3: 5}


# ---------------------------------------------------------------- canonical labeling

def _refine(n: int, inc: list[list[int]], colors: list[int]) -> list[int]:
    """Equitable refinement of an ordered colouring.  New colours are ranks of
    (old colour, sorted multiset of co-edge colour tuples), so the result is
    invariant under relabeling."""
    ncol = len(set(colors))
    while True:
        keys = []
        for v in range(n):
            sig = sorted(tuple(sorted(colors[u] for u in bits(e) if u != v)) for e in inc[v])
            keys.append((colors[v], tuple(sig)))
        order = sorted(set(keys))
        rank = {key: i for i, key in enumerate(order)}
        colors = [rank[key] for key in keys]
        if len(order) == ncol:
            return colors
        ncol = len(order)


def _individualize(colors: list[int], v: int) -> list[int]:
    """Split v off the front of its cell."""
    out = [2 * x + 1 for x in colors]
    out[v] -= 1
    return out


def _certificate(edges: tuple[int, ...], lab: list[int]) -> tuple[int, ...]:
    out = []
    for e in edges:
        m = 0
        for v in bits(e):
            m |= 1 << lab[v]
        out.append(m)
    out.sort(key=lambda x: (popcount(x), x))
    return tuple(out)


def _orbit_of(v: int, autos: list[list[int]]) -> set[int]:
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        for g in autos:
            y = g[x]
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def canonical_labeling(H: Hypergraph) -> tuple[list[int], tuple[int, ...]]:
    """(lab, certificate): vertex v goes to lab[v] in the canonical form."""
    n = H.n
    inc = [list(H.incidence[v]) for v in range(n)]
    edges = H.edges
    best: list = [None, None]  # certificate, labeling
    autos: list[list[int]] = []

    def search(colors: list[int], prefix: list[int]):
        colors = _refine(n, inc, colors)
        if len(set(colors)) == n:
            cert = _certificate(edges, colors)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, colors
            elif cert == best[0]:
                # colors o best^-1 maps the best leaf onto this one
                inv = [0] * n
                for v, c in enumerate(best[1]):
                    inv[c] = v
                g = [inv[c] for c in colors]
                if g != list(range(n)):
                    autos.append(g)
            return
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min((c for c, s in counts.items() if s > 1), key=lambda c: (counts[c], c))
        cell = [v for v in range(n) if colors[v] == target]
        done: list[int] = []
        for v in cell:
            if done:
                fixing = [g for g in autos if all(g[p] == p for p in prefix)]
                if any(v in _orbit_of(w, fixing) for w in done):
                    continue
            done.append(v)
            search(_individualize(colors, v), prefix + [v])

    search([0] * n, [])
    return best[1], best[0]


def canonical_form(H: Hypergraph) -> Hypergraph:
    lab, cert = canonical_labeling(H)
    return Hypergraph(H.n, cert, H.rank, dict(H.meta))


def canonical_key(H: Hypergraph) -> tuple:
    return (H.n, canonical_labeling(H)[1])


def are_isomorphic(G: Hypergraph, H: Hypergraph) -> bool:
    return G.n == H.n and G.num_edges == H.num_edges and canonical_key(G) == canonical_key(H)


# ---------------------------------------------------------------- catalogs

def _graph_level(prev: list[tuple[int, ...]], n: int) -> list[tuple[int, ...]]:
    seen: set[tuple[int, ...]] = set()
    new_v = n - 1
    for cert in prev:
        for nb in range(1 << new_v):
            edges = cert + tuple((1 << u) | (1 << new_v) for u in bits(nb))
            H = Hypergraph(n, tuple(sorted(edges, key=lambda x: (popcount(x), x))), 2)
            seen.add(canonical_labeling(H)[1])
    return sorted(seen, key=lambda c: (len(c), c))


def _cache_dir() -> Optional[Path]:
    root = os.environ.get("EDGESTAT_CACHE")
    if root == "":
        return None
    path = Path(root) if root else Path.home() / ".cache" / "edgestat"
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return path


def _load_level(path: Path, n: int) -> Optional[list[tuple[int, ...]]]:
    try:
        rows = path.read_text().splitlines()
    except OSError:
        return None
    out = [tuple(int(x) for x in row.split()) if row else () for row in rows]
    return out if len(out) == GRAPH_COUNTS[n] else None


def graph_certificates(n: int) -> list[tuple[int, ...]]:
    """Canonical edge tuples of every graph on n vertices, one per isomorphism
    class, grown vertex by vertex.  Levels n >= 7 are cached on disk
    (``EDGESTAT_CACHE``; empty string disables)."""
    if n not in GRAPH_COUNTS:
        raise WorkTooLarge(f"graph catalog is limited to n <= {max(GRAPH_COUNTS)}")
    level: list[tuple[int, ...]] = [()]
    cache = _cache_dir()
    for m in range(1, n + 1):
        path = cache / f"graphs{m}.txt" if cache else None
        got = _load_level(path, m) if path and m >= 7 else None
        if got is None:
            got = _graph_level(level, m)
            if len(got) != GRAPH_COUNTS[m]:
                raise AssertionError(f"catalog for n={m} has {len(got)} classes")
            if path and m >= 7:
                tmp = path.with_suffix(".tmp")
                tmp.write_text("\n".join(" ".join(map(str, c)) for c in got) + "\n")
                tmp.replace(path)
        level = got
    return level


def graph_catalog(n: int) -> Iterator[Hypergraph]:
    for cert in graph_certificates(n):
        yield Hypergraph(n, cert, 2)


def uniform3_catalog(n: int) -> Iterator[Hypergraph]:
    """Every 3-uniform hypergraph on n <= 5 vertices up to isomorphism."""
    if n > 5:
        raise WorkTooLarge("3-uniform catalog is limited to n <= 5")
    triples = [sum(1 << v for v in t) for t in combinations(range(n), 3)]
    seen: set[tuple[int, ...]] = set()
    for sel in range(1 << len(triples)):
        H = Hypergraph(n, tuple(t for i, t in enumerate(triples) if sel >> i & 1), 3)
        seen.add(canonical_labeling(H)[1])
    for cert in sorted(seen, key=lambda c: (len(c), c)):
        yield Hypergraph(n, cert, 3)


def catalog(n: int, r: int = 2) -> Iterator[Hypergraph]:
    if r == 2:
        return graph_catalog(n)
    if r == 3:
        return uniform3_catalog(n)
    raise WorkTooLarge("catalogs exist for r in {2, 3}")


# ---------------------------------------------------------------- exact I over catalogs

def _k_selector(n: int, k: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    return popcounts(masks) == k


def i_value_fast(H: Hypergraph, k: int, l: int, sel: Optional[np.ndarray] = None) -> Fraction:
    """I(H, k, l) from the all-subset table (small n)."""
    e, _ = all_subset_table(H)
    if sel is None:
        sel = _k_selector(H.n, k)
    hits = int(np.count_nonzero(e[sel] == l))
    return Fraction(hits, math.comb(H.n, k))


def _better(value: Fraction, H: Hypergraph, best_value, best_H) -> bool:
    """Larger I wins; ties go to fewer edges, then the smaller edge tuple."""
    if best_H is None or value > best_value:
        return True
    if value < best_value:
        return False
    return (H.num_edges, H.edges) < (best_H.num_edges, best_H.edges)


@dataclass
class SearchResult:
    n: int
    k: int
    l: int
    r: int
    best_value: Fraction
    witness: Hypergraph
    method: str
    trajectory: list = field(default_factory=list)
    seed: Optional[int] = None
    graphs_visited: Optional[int] = None
    config: Optional[dict] = None

    def to_json_obj(self) -> dict:
        out = {
            "n": self.n, "k": self.k, "l": self.l, "r": self.r,
            "best_value": str(self.best_value),
            "best_value_approx": f"{float(self.best_value):.12g}",
            "witness": to_text(self.witness),
            "method": self.method,
            "trajectory": self.trajectory,
            "seed": self.seed,
        }
        if self.graphs_visited is not None:
            out["graphs_visited"] = self.graphs_visited
        if self.config is not None:
            out["config"] = self.config
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SearchResult":
        return cls(obj["n"], obj["k"], obj["l"], obj["r"], Fraction(obj["best_value"]),
                   from_text(obj["witness"]), obj["method"], obj.get("trajectory", []),
                   obj.get("seed"), obj.get("graphs_visited"), obj.get("config"))

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)

    def file_name(self) -> str:
        return f"n{self.n}_k{self.k}_l{self.l}_r{self.r}_{self.method}_seed{self.seed}.json"

    def save(self, directory) -> Path:
        path = Path(directory) / self.file_name()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        return path


def _check_exhaustive(n: int, k: int, r: int) -> None:
    limit = EXHAUSTIVE_MAX_N.get(r)
    if limit is None:
        raise WorkTooLarge("exhaustive search exists for r in {2, 3}")
    if n > limit:
        classes = {2: "about 2^C(n,2)/n!", 3: "about 2^C(n,3)/n!"}[r]
        est = 2 ** math.comb(n, r) // math.factorial(n)
        raise WorkTooLarge(
            f"exhaustive search for r={r} is limited to n <= {limit}; n={n} has "
            f"{classes} ~ {est} classes, each needing C({n},{k}) subset checks")
    if not 0 <= k <= n:
        raise HypergraphError("needs 0 <= k <= n")


def _scan_chunk(args) -> tuple[Fraction, Optional[tuple], int]:
    n, k, l, r, certs = args
    sel = _k_selector(n, k)
    best_value, best_H = Fraction(-1), None
    for cert in certs:
        H = Hypergraph(n, cert, r)
        v = i_value_fast(H, k, l, sel)
        if _better(v, H, best_value, best_H):
            best_value, best_H = v, H
    return best_value, best_H.edges if best_H else None, len(certs)


def exhaustive_extremal(n: int, k: int, l: int, r: int = 2, jobs: int = 1) -> SearchResult:
    """Exact I(n, k, l) as the maximum over isomorphism classes."""
    _check_exhaustive(n, k, r)
    certs = [H.edges for H in catalog(n, r)]
    jobs = max(1, jobs)
    step = max(1, -(-len(certs) // (4 * jobs)))
    chunks = [(n, k, l, r, certs[i:i + step]) for i in range(0, len(certs), step)]
    if jobs == 1:
        parts = [_scan_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_scan_chunk, chunks))
    best_value, best_H, visited = Fraction(-1), None, 0
    for value, edges, count in parts:
        visited += count
        H = Hypergraph(n, edges, r)
        if _better(value, H, best_value, best_H):
            best_value, best_H = value, H
    return SearchResult(n, k, l, r, best_value, best_H, "exhaustive", [], None, visited)


# ---------------------------------------------------------------- heuristic search

@dataclass
class SearchConfig:
    """Knobs for :func:`local_search`.

    method: ``local`` accepts only non-worsening toggles, ``anneal`` also
    accepts a worse state with probability exp(delta / T).
    start: ``empty``, ``random`` (each r-set with probability start_p) or a
    construction kind with its parameters in ``start_params``.
    """

    method: str = "local"
    iterations: int = 2000
    restarts: int = 1
    t0: float = 0.05
    cooling: float = 0.995
    start: str = "random"
    start_p: float = 0.5
    start_params: dict = field(default_factory=dict)
    proposals_per_step: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown search config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SearchConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


def _candidates(n: int, r: int) -> list[int]:
    return [sum(1 << v for v in t) for t in combinations(range(n), r)]


def _start_graph(n: int, k: int, r: int, cfg: SearchConfig, rng: np.random.Generator,
                 cands: list[int]) -> set[int]:
    if cfg.start == "empty":
        return set()
    if cfg.start == "random":
        keep = rng.random(len(cands)) < cfg.start_p
        return {c for c, kp in zip(cands, keep) if kp}
    from .constructions import ConstructionSpec

    params = dict(cfg.start_params)
    params.setdefault("allow_round", True)
    H = ConstructionSpec(cfg.start, n, k, **params).build()
    if H.rank != r or any(popcount(e) != r for e in H.edges):
        raise HypergraphError("start construction does not match r")
    return set(H.edges)


class _Evaluator:
    def __init__(self, n: int, k: int, l: int, r: int):
        self.n, self.k, self.l, self.r = n, k, l, r
        self.table_mode = n <= 16
        if self.table_mode:
            masks = np.arange(1 << n, dtype=np.int64)
            self.sel_masks = masks[popcounts(masks) == k]
        self.total = math.comb(n, k)

    def __call__(self, edges: set[int]) -> Fraction:
        H = Hypergraph(self.n, tuple(sorted(edges, key=lambda x: (popcount(x), x))), self.r)
        if self.table_mode:
            counts = np.zeros(self.sel_masks.shape[0], dtype=np.int64)
            for e in H.edges:
                counts += (self.sel_masks & e) == e
            return Fraction(int(np.count_nonzero(counts == self.l)), self.total)
        return exact_joint_distribution(H, self.k).probability(self.l)


def _run_once(n, k, l, r, cfg: SearchConfig, rng, evaluate, cands, restart: int):
    cur = _start_graph(n, k, r, cfg, rng, cands)
    cur_v = evaluate(cur)
    best, best_v = set(cur), cur_v
    traj = [{"restart": restart, "iteration": 0, "value": str(cur_v), "edges": len(cur)}]
    temp = cfg.t0
    for it in range(1, cfg.iterations + 1):
        moves = rng.integers(0, len(cands), size=cfg.proposals_per_step)
        cand_best = None
        for mv in moves:
            trial = cur ^ {cands[int(mv)]}
            v = evaluate(trial)
            if cand_best is None or v > cand_best[0]:
                cand_best = (v, trial)
        v, trial = cand_best
        accept = v >= cur_v
        if not accept and cfg.method == "anneal" and temp > 0:
            accept = rng.random() < math.exp(float(v - cur_v) / temp)
        else:
            rng.random()  # keep the stream aligned between methods
        if accept:
            cur, cur_v = trial, v
            if v > best_v or (v == best_v and len(trial) < len(best)):
                best, best_v = set(trial), v
                traj.append({"restart": restart, "iteration": it, "value": str(v),
                             "edges": len(trial)})
        temp *= cfg.cooling
    return best_v, best, traj


def local_search(n: int, k: int, l: int, r: int = 2, config: Optional[SearchConfig] = None,
                 seed: int = 0) -> SearchResult:
    """Hill climbing or annealing over single r-set toggles; a lower bound on I(n, k, l)."""
    cfg = config or SearchConfig()
    if cfg.method not in ("local", "anneal"):
        raise ValueError(f"unknown search method {cfg.method!r}")
    if not 0 <= k <= n:
        raise HypergraphError("needs 0 <= k <= n")
    cands = _candidates(n, r)
    if not cands:
        raise HypergraphError("no candidate edges")
    evaluate = _Evaluator(n, k, l, r)
    rng = np.random.Generator(np.random.Philox(seed))
    best_v, best_H, traj = Fraction(-1), None, []
    for restart in range(cfg.restarts):
        v, edges, t = _run_once(n, k, l, r, cfg, rng, evaluate, cands, restart)
        traj.extend(t)
        H = Hypergraph(n, tuple(sorted(edges, key=lambda x: (popcount(x), x))), r)
        if _better(v, H, best_v, best_H):
            best_v, best_H = v, H
    witness = canonical_form(best_H)
    return SearchResult(n, k, l, r, best_v, witness, cfg.method, traj, seed,
                        config=cfg.to_dict())


# ---------------------------------------------------------------- monotonicity in n

@dataclass
class MonotoneReport:
    k: int
    l: int
    r: int
    values: dict  # n -> Fraction
    construction_values: dict  # n -> {name: Fraction}
    nonincreasing: bool
    dominates_constructions: bool

    @property
    def passed(self) -> bool:
        return self.nonincreasing and self.dominates_constructions

    def to_json_obj(self) -> dict:
        return {
            "k": self.k, "l": self.l, "r": self.r,
            "values": {str(n): str(v) for n, v in sorted(self.values.items())},
            "construction_values": {
                str(n): {name: str(v) for name, v in sorted(d.items())}
                for n, d in sorted(self.construction_values.items())
            },
            "nonincreasing": self.nonincreasing,
            "dominates_constructions": self.dominates_constructions,
            "pass": self.passed,
        }


def construction_graphs(n: int, k: int, r: int = 2) -> dict[str, Hypergraph]:
    """Deterministic block constructions on n vertices (rounded block sizes)."""
    from .constructions import bipartite_kminus1, planted_clique, r_clique, star_forest

    out: dict[str, Hypergraph] = {}
    if k > n or k < 1:
        return out
    if r == 2:
        out["bipartite_kminus1"] = bipartite_kminus1(n, k, allow_round=True)
        for m in range(1, k + 1):
            out[f"planted_clique_m{m}"] = planted_clique(n, k, m, allow_round=True)
        for l in range(1, k):
            out[f"star_forest_l{l}"] = star_forest(n, k, l, allow_round=True)
    for m in range(r, k + 1):
        out[f"r_clique_m{m}"] = r_clique(n, k, m, r, allow_round=True)
    return out


def verify_monotone_in_n(k: int, l: int, r: int = 2, n_range: Iterable[int] = (),
                         jobs: int = 1) -> MonotoneReport:
    ns = sorted(set(n_range))
    if not ns:
        raise ValueError("empty n range")
    for n in ns:
        _check_exhaustive(n, k, r)
    values, cons = {}, {}
    dominated = True
    for n in ns:
        values[n] = exhaustive_extremal(n, k, l, r, jobs=jobs).best_value
        here = {}
        for name, H in construction_graphs(n, k, r).items():
            here[name] = i_value_fast(H, k, l)
            dominated &= here[name] <= values[n]
        cons[n] = here
    seq = [values[n] for n in ns]
    mono = all(a >= b for a, b in zip(seq, seq[1:]))
    return MonotoneReport(k, l, r, values, cons, mono, dominated)
