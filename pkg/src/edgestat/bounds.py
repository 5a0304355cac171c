"""Closed-form upper bounds on induced edge-count probabilities, and exact
checks of their count forms against enumerated subsets.

Every bound value is carried as a certified interval (200-bit mpmath interval
arithmetic, outward rounded).  A check passes only when the observed integer
count is at most the *lower* end of that interval; it fails only when the
count exceeds the upper end.  Anything in between is reported as
``undecided`` and treated as a failure by callers.

Logarithms are base 2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .enumeration import (JointDistribution, all_subset_table, count_forest_subsets,
                          exact_joint_distribution, joint_from_table)
from .exact import E_LOWER, E_UPPER, IV, Real, Root, as_fraction, iv_bounds, iv_of, iv_root, log2_iv
from .hypercore import Hypergraph, HypergraphError

BOUND_IDS = (
    "thm_hyper_1e",
    "thm_graph_o1_small",
    "thm_graph_o1_large",
    "thm_hyper_o1",
    "thm_forest",
    "propo1",
    "propo2",
    "propo3",
    "coro_o1",
    "lemma_B_pleasant",
    "lemma_B_nice",
    "lemma_phi",
)

#: Small graphs read counts off the all-subset table instead of walking subsets.
TABLE_MAX_N = 14

COUNT_IDS = ("thm_hyper_1e", "thm_forest", "propo1", "propo2", "propo3", "coro_o1")


class Inapplicable(ValueError):
    """Parameters fall outside the hypothesis of the bound."""


@dataclass(frozen=True)
class BoundValue:
    """A real number known to lie in ``[lo, hi]``."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def from_iv(cls, x) -> "BoundValue":
        lo, hi = iv_bounds(x)
        return cls(lo, hi)

    @classmethod
    def exact(cls, q) -> "BoundValue":
        q = as_fraction(q)
        return cls(q, q)

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def scale(self, q) -> "BoundValue":
        q = as_fraction(q)
        if q < 0:
            raise ValueError("scale must be nonnegative")
        return BoundValue(self.lo * q, self.hi * q)


def _to_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class BoundSpec:
    id: str
    k: int
    l: int
    r: int = 2
    c: Optional[str] = None
    eps: Optional[str] = None
    z: Optional[str] = None
    assume_large_k: bool = False

    def __post_init__(self):
        if self.id not in BOUND_IDS:
            raise ValueError(f"unknown bound id {self.id!r}")
        for name in ("c", "eps", "z"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, str):
                object.__setattr__(self, name, _to_str(as_fraction(v)))

    def param(self, name: str) -> Fraction:
        v = getattr(self, name)
        if v is None:
            raise Inapplicable(f"{self.id} needs parameter {name}")
        return as_fraction(v)

    def to_dict(self) -> dict:
        d = {"id": self.id, "k": self.k, "l": self.l, "r": self.r}
        for name in ("c", "eps", "z"):
            if getattr(self, name) is not None:
                d[name] = getattr(self, name)
        if self.assume_large_k:
            d["assume_large_k"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundSpec":
        return cls(**d)


@dataclass
class BoundReport:
    spec: BoundSpec
    status: str  # pass | vacuous | fail | undecided | inapplicable
    observed: Optional[int] = None
    bound: Optional[BoundValue] = None
    reason: str = ""
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "vacuous")

    @property
    def violated(self) -> bool:
        return self.status in ("fail", "undecided")

    @property
    def slack(self) -> Optional[Fraction]:
        if self.bound is None or self.observed is None:
            return None
        return self.bound.lo - self.observed

    def to_json_obj(self) -> dict:
        out = {"spec": self.spec.to_dict(), "status": self.status}
        if self.observed is not None:
            out["observed"] = str(self.observed)
        if self.bound is not None:
            out["bound_lo"] = _to_str(self.bound.lo)
            out["bound_hi"] = _to_str(self.bound.hi)
            out["bound_approx"] = f"{float(self.bound):.12g}"
            out["slack_approx"] = f"{float(self.slack):.12g}"
        if self.reason:
            out["reason"] = self.reason
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BoundReport":
        bound = None
        if "bound_lo" in obj:
            bound = BoundValue(Fraction(obj["bound_lo"]), Fraction(obj["bound_hi"]))
        observed = int(obj["observed"]) if "observed" in obj else None
        return cls(BoundSpec.from_dict(obj["spec"]), obj["status"], observed, bound,
                   obj.get("reason", ""), list(obj.get("notes", [])))

    def __eq__(self, other):
        if not isinstance(other, BoundReport):
            return NotImplemented
        return self.to_json_obj() == other.to_json_obj()


# ---------------------------------------------------------------- probability forms

def _probability_value(x, notes: list) -> BoundValue:
    v = BoundValue.from_iv(x)
    if v.lo >= 1:
        notes.append("vacuous: probability bound at least 1")
    return v


def bound_thm_hyper_1e(r: int, k: int, l: int) -> tuple[BoundValue, list]:
    """k / (k - r l) / e, valid for 1 <= l < k/r."""
    if not (1 <= l and r * l < k):
        raise Inapplicable("needs 1 <= l < k/r")
    q = Fraction(k, k - r * l)
    notes: list = []
    v = BoundValue(q / E_UPPER, q / E_LOWER)
    if v.lo >= 1:
        notes.append("vacuous: probability bound at least 1")
    return v, notes


def graph_o1_regime(k: int, l: int) -> str:
    """'small' when l <= k / log^4 k, else 'large'.  At equality both agree."""
    if k < 2:
        raise Inapplicable("needs k >= 2")
    lg4 = log2_iv(k) ** 4
    prod = IV.mpf(l) * lg4
    lo, hi = iv_bounds(prod)
    if hi <= k:
        return "small"
    if lo > k:
        return "large"
    # only possible when log2 k is an integer and l*log^4 k == k exactly
    return "small"


def bound_thm_graph_o1(k: int, l: int, eps=None) -> tuple[BoundValue, list]:
    """90 l^{-1/4} in the small-l regime and 90 k^{-1/4} log k beyond it."""
    if l < 1:
        raise Inapplicable("needs l >= 1")
    if eps is not None:
        eps = as_fraction(eps)
        if not 0 < eps < 1:
            raise Inapplicable("needs 0 < eps < 1")
        if Fraction(2 * l) > (1 - eps) * k:
            raise Inapplicable("needs l <= (1 - eps) k / 2")
    elif 2 * l > k:
        raise Inapplicable("needs l <= k / 2")
    regime = graph_o1_regime(k, l)
    notes = [f"regime: {regime}", "holds only for sufficiently large k"]
    if regime == "small":
        x = 90 / iv_root(IV.mpf(l), 4)
    else:
        x = 90 * log2_iv(k) / iv_root(IV.mpf(k), 4)
    return _probability_value(x, notes), notes


def bound_thm_hyper_o1(r: int, k: int, l: int, eps=None) -> tuple[BoundValue, list]:
    """100 l^{-1/(2r)} for r >= 3."""
    if r < 3:
        raise Inapplicable("needs r >= 3")
    if l < 1:
        raise Inapplicable("needs l >= 1")
    if eps is not None:
        eps = as_fraction(eps)
        if not 0 < eps < 1:
            raise Inapplicable("needs 0 < eps < 1")
        if Fraction(r * l) > (1 - eps) * k:
            raise Inapplicable("needs l <= (1 - eps) k / r")
    elif r * l > k:
        raise Inapplicable("needs l <= k / r")
    notes = ["holds only for sufficiently large k"]
    x = 100 / iv_root(IV.mpf(l), 2 * r)
    return _probability_value(x, notes), notes


def phi(x, k: int, r: int, l: int) -> float:
    d = k - r * l
    if d <= 0:
        raise ValueError("needs k - r l > 0")
    if x < 0:
        raise ValueError("needs x >= 0")
    return float(x) * math.exp(-d * float(x))


def phi_max(k: int, r: int, l: int) -> float:
    d = k - r * l
    if d <= 0:
        raise ValueError("needs k - r l > 0")
    return 1.0 / (d * math.e)


def phi_grid_max(d: int, step: Fraction = Fraction(1, 10_000), top: int = 10) -> float:
    """Largest value of x exp(-d x) over the grid 0, step, ..., top."""
    import numpy as np

    count = int(top / step) + 1
    xs = np.arange(count, dtype=np.float64) * float(step)
    return float(np.max(xs * np.exp(-d * xs)))


# ---------------------------------------------------------------- count forms

def count_scale(n: int, k: int) -> Fraction:
    """n^k / k!"""
    return Fraction(n ** k, math.factorial(k))


_COEFF_CACHE: dict = {}


def _coefficient(spec: BoundSpec) -> tuple[object, tuple[Real, Real], list]:
    """Interval coefficient of n^k/k! and the m-window for an m-windowed lemma."""
    key = (spec.id, spec.k, spec.r, spec.c, spec.eps, spec.assume_large_k)
    got = _COEFF_CACHE.get(key)
    if got is None:
        try:
            got = _coefficient_uncached(spec)
        except Inapplicable as exc:
            got = exc
        _COEFF_CACHE[key] = got
    if isinstance(got, Inapplicable):
        raise got
    x, window, notes = got
    return x, window, list(notes)


def _coefficient_uncached(spec: BoundSpec) -> tuple[object, tuple[Real, Real], list]:
    k, r = spec.k, spec.r
    notes: list = []
    half_root_k = Root(Fraction(k, 4))
    if spec.id == "propo1":
        c = spec.param("c")
        if not (0 < c and half_root_k > c):
            raise Inapplicable("needs 0 < c < sqrt(k)/2")
        x = 32 * IV.sqrt(IV.mpf(r)) / IV.sqrt(iv_of(c))
        return x, (c, half_root_k), notes
    if spec.id == "propo2":
        c = spec.param("c")
        if not (half_root_k <= c and c <= Fraction(k, 32 * r)):
            raise Inapplicable("needs sqrt(k)/2 <= c <= k/(32 r)")
        x = 44 * IV.sqrt(IV.mpf(r)) / iv_root(IV.mpf(k), 4)
        return x, (c, 2 * c), notes
    if spec.id == "propo3":
        eps = spec.param("eps")
        if not 0 < eps < Fraction(1, 2):
            raise Inapplicable("needs 0 < eps < 1/2")
        x = 8 * iv_root(IV.mpf(r), 4) / IV.sqrt(iv_of(eps)) / iv_root(IV.mpf(k), 4)
        return x, (eps * k, (1 - eps) * k), notes
    if spec.id == "coro_o1":
        c = spec.param("c")
        eps = spec.param("eps")
        if not spec.assume_large_k:
            raise Inapplicable("needs k sufficiently large; pass assume_large_k to acknowledge")
        if not (c > 0 and 0 < eps < 1):
            raise Inapplicable("needs c' > 0 and 0 < eps < 1")
        if k < 2:
            raise Inapplicable("needs k >= 2")
        notes.append("assumed: k sufficiently large")
        sr = IV.sqrt(IV.mpf(r))
        x = 32 * sr / IV.sqrt(iv_of(c)) + 23 * sr * log2_iv(k) / iv_root(IV.mpf(k), 4)
        return x, (c, (1 - eps) * k), notes
    raise ValueError(f"{spec.id} is not an m-windowed count bound")


def _verdict(spec: BoundSpec, observed: int, bound: BoundValue, total: int,
             notes: list) -> BoundReport:
    if observed <= bound.lo:
        status = "vacuous" if bound.lo >= total else "pass"
    elif observed > bound.hi:
        status = "fail"
    else:
        status = "undecided"
    return BoundReport(spec, status, observed, bound, notes=notes)


def check_count_bound(H: Hypergraph, spec: BoundSpec,
                      dist: Optional[JointDistribution] = None) -> BoundReport:
    """Check one count-form bound on H.  ``dist`` may be supplied to reuse an
    already computed joint distribution for the same k."""
    if spec.id == "thm_hyper_1e":
        return check_thm_hyper_1e_counts(H, spec.k, spec.l, spec.r, dist)
    if spec.id == "thm_forest":
        return check_forest_bound(H, spec.k, spec.l)
    if spec.id not in ("propo1", "propo2", "propo3", "coro_o1"):
        return BoundReport(spec, "inapplicable", reason=f"{spec.id} has no count form")
    err = _basic_inapplicable(H, spec)
    if err:
        return BoundReport(spec, "inapplicable", reason=err)
    try:
        x, (lo, hi), notes = _coefficient(spec)
    except Inapplicable as exc:
        return BoundReport(spec, "inapplicable", reason=str(exc))
    if dist is None:
        dist = exact_joint_distribution(H, spec.k)
    from .enumeration import count_with_m_range

    observed = count_with_m_range(H, spec.k, spec.l, lo, hi, dist=dist)
    bound = BoundValue.from_iv(x).scale(count_scale(H.n, spec.k))
    return _verdict(spec, observed, bound, math.comb(H.n, spec.k), notes)


def _basic_inapplicable(H: Hypergraph, spec: BoundSpec) -> str:
    if spec.k > H.n:
        return "needs n >= k"
    if spec.k < 1 or spec.l < 1:
        return "needs k, l >= 1"
    if H.rank > spec.r:
        return f"hypergraph rank {H.rank} exceeds r = {spec.r}"
    return ""


def check_thm_hyper_1e_counts(H: Hypergraph, k: int, l: int, r: int,
                              dist: Optional[JointDistribution] = None) -> BoundReport:
    spec = BoundSpec("thm_hyper_1e", k, l, r)
    err = _basic_inapplicable(H, spec)
    if not err and r * l >= k:
        err = "needs l < k/r"
    if err:
        return BoundReport(spec, "inapplicable", reason=err)
    if dist is None:
        dist = exact_joint_distribution(H, k)
    observed = dist.count(l)
    q = Fraction(k, k - r * l) * count_scale(H.n, k)
    bound = BoundValue(q / E_UPPER, q / E_LOWER)
    return _verdict(spec, observed, bound, math.comb(H.n, k), [])


def forest_applicable(k: int, l: int) -> bool:
    return l >= 1 and 16 * l * l <= k


def check_forest_bound(G: Hypergraph, k: int, l: int,
                       observed: Optional[int] = None) -> BoundReport:
    spec = BoundSpec("thm_forest", k, l, 2)
    if not G.is_graph:
        return BoundReport(spec, "inapplicable", reason="needs a graph")
    if k > G.n:
        return BoundReport(spec, "inapplicable", reason="needs n >= k")
    if not forest_applicable(k, l):
        return BoundReport(spec, "inapplicable", reason="needs 1 <= l <= sqrt(k)/4")
    if observed is None:
        observed = count_forest_subsets(G, k, l)
    x = 50 / IV.sqrt(IV.mpf(l))
    bound = BoundValue.from_iv(x).scale(count_scale(G.n, k))
    return _verdict(spec, observed, bound, math.comb(G.n, k), [])


def probability_bound(spec: BoundSpec) -> tuple[BoundValue, list]:
    """Probability-form value of a top-level bound."""
    if spec.id == "thm_hyper_1e":
        return bound_thm_hyper_1e(spec.r, spec.k, spec.l)
    if spec.id in ("thm_graph_o1_small", "thm_graph_o1_large"):
        value, notes = bound_thm_graph_o1(spec.k, spec.l, spec.eps)
        want = spec.id.rsplit("_", 1)[1]
        if f"regime: {want}" not in notes:
            raise Inapplicable(f"l is not in the {want} regime")
        return value, notes
    if spec.id == "thm_hyper_o1":
        return bound_thm_hyper_o1(spec.r, spec.k, spec.l, spec.eps)
    if spec.id == "thm_forest":
        if not forest_applicable(spec.k, spec.l):
            raise Inapplicable("needs 1 <= l <= sqrt(k)/4")
        return BoundValue.from_iv(50 / IV.sqrt(IV.mpf(spec.l))), []
    if spec.id == "lemma_phi":
        d = spec.k - spec.r * spec.l
        if d <= 0:
            raise Inapplicable("needs k - r l > 0")
        return BoundValue(1 / (d * E_UPPER), 1 / (d * E_LOWER)), []
    if spec.id == "lemma_B_pleasant":
        eps = spec.param("eps")
        x = 2 * iv_root(IV.mpf(spec.r), 4) / IV.sqrt(iv_of(eps)) / iv_root(IV.mpf(spec.k), 4)
        return BoundValue.from_iv(x), ["coefficient of n^a/a!"]
    if spec.id == "lemma_B_nice":
        z = spec.param("z")
        x = IV.mpf(4) / 3 / IV.sqrt(iv_of(z))
        return BoundValue.from_iv(x), ["coefficient of n^a/a!"]
    x, _, notes = _coefficient(spec)
    return BoundValue.from_iv(x), notes + ["coefficient of n^k/k!"]


def _joint(H: Hypergraph, k: int, jobs: int) -> JointDistribution:
    if H.n <= TABLE_MAX_N:
        e, cov = all_subset_table(H)
        return joint_from_table(H.n, k, e, cov)
    return exact_joint_distribution(H, k, jobs=jobs)


def _check_one(args) -> list[tuple[str, BoundReport]]:
    name, H, specs, jobs = args
    out = []
    cache: dict[int, JointDistribution] = {}
    for spec in specs:
        if spec.id in ("propo1", "propo2", "propo3", "coro_o1", "thm_hyper_1e") \
                and 1 <= spec.k <= H.n:
            if spec.k not in cache:
                cache[spec.k] = _joint(H, spec.k, jobs)
            rep = check_count_bound(H, spec, cache[spec.k])
        elif spec.id == "thm_forest":
            rep = check_forest_bound(H, spec.k, spec.l) if H.is_graph else \
                BoundReport(spec, "inapplicable", reason="needs a graph")
        else:
            rep = check_count_bound(H, spec)
        out.append((name, rep))
    return out


def check_corpus(graphs, specs, jobs: int = 1) -> list[tuple[str, BoundReport]]:
    """Run each spec against each named hypergraph; deterministic ordering.
    With ``jobs > 1`` graphs are spread over worker processes."""
    specs = list(specs)
    graphs = list(graphs)
    if jobs > 1 and len(graphs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        tasks = [(name, H, specs, 1) for name, H in graphs]
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_check_one, tasks, chunksize=16))
    else:
        parts = [_check_one((name, H, specs, jobs)) for name, H in graphs]
    return [row for part in parts for row in part]


def summary_csv(rows) -> str:
    lines = ["graph,spec,observed,bound,pass,slack"]
    for name, rep in rows:
        obs = "" if rep.observed is None else str(rep.observed)
        bound = "" if rep.bound is None else f"{float(rep.bound):.12g}"
        slack = "" if rep.slack is None else f"{float(rep.slack):.12g}"
        verdict = rep.status if rep.status in ("inapplicable", "undecided", "vacuous") \
            else ("true" if rep.passed else "false")
        lines.append(f"{name},{rep.spec.id},{obs},{bound},{verdict},{slack}")
    return "\n".join(lines) + "\n"


__all__ = [
    "BOUND_IDS", "BoundSpec", "BoundReport", "BoundValue", "Inapplicable",
    "bound_thm_hyper_1e", "bound_thm_graph_o1", "bound_thm_hyper_o1", "graph_o1_regime",
    "phi", "phi_max", "phi_grid_max", "count_scale", "check_count_bound",
    "check_thm_hyper_1e_counts", "check_forest_bound", "forest_applicable",
    "probability_bound", "check_corpus", "summary_csv",
]
