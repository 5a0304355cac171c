"""Command-line entry point.

Every subcommand writes deterministic JSON (sorted keys, big integers and
rationals as strings) with an embedded run manifest.  Exit codes: 0 when all
checks pass, 1 when a violation is found, 2 on input or usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .bounds import (BOUND_IDS, BoundSpec, Inapplicable, check_corpus, summary_csv)
from .constructions import KINDS, ConstructionSpec, bipartite_law, clique_law
from .enumeration import (JointDistribution, WorkTooLarge, exact_joint_distribution,
                          monte_carlo_estimate, sample_edge_counts)
from .hypercore import Hypergraph, HypergraphError, load, to_text

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
NOT_IN_MANIFEST = {"func", "jobs", "out", "out_dir", "stamp", "command"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- manifest and output

@dataclass
class RunManifest:
    subcommand: str
    params: dict
    seed: Optional[int]
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    timestamp: Optional[str] = None

    def to_json_obj(self) -> dict:
        out = asdict(self)
        if self.timestamp is None:
            del out["timestamp"]
        return out


def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _timestamp(args) -> Optional[str]:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), timezone.utc).isoformat()
    if getattr(args, "stamp", False):
        return datetime.now(timezone.utc).isoformat()
    return None


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def make_manifest(args, inputs: Optional[list] = None, seed: Optional[int] = None) -> RunManifest:
    params = {k: _jsonable(v) for k, v in sorted(vars(args).items())
              if k not in NOT_IN_MANIFEST and k != "seed"}
    digests = {}
    for p in inputs or []:
        p = Path(p)
        digests[str(p)] = _digest(p)
    return RunManifest(args.command, params, seed, inputs=digests, timestamp=_timestamp(args))


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(text: str, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def resolve_seed(args) -> int:
    """The seed from --seed, or a fresh one drawn from system entropy."""
    if args.seed is None:
        args.seed = secrets.randbits(63)
    return args.seed


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


# ---------------------------------------------------------------- graph sources

def _construction_from_args(args, kind: str) -> ConstructionSpec:
    if kind not in KINDS:
        raise UsageError(f"unknown construction {kind!r}; choose from {', '.join(KINDS)}")
    if args.n is None or args.k is None:
        raise UsageError("constructions need --n and --k")
    return ConstructionSpec(kind, args.n, args.k, m=args.m, r=args.r_param, s=args.s,
                            l=args.construct_l, seed=args.seed,
                            allow_round=args.allow_round)


def _source_graph(args) -> tuple[Hypergraph, list]:
    if args.graph and args.construct:
        raise UsageError("give either --graph or --construct, not both")
    if args.graph:
        path = Path(args.graph)
        if not path.is_file():
            raise UsageError(f"graph file not found: {path}")
        return load(path), [path]
    if args.construct:
        spec = _construction_from_args(args, args.construct)
        if spec.kind in ("gnp_one", "hyper_upclosed", "matching_gnp"):
            resolve_seed(args)
            spec = ConstructionSpec(**{**spec.to_dict(), "seed": args.seed})
        return spec.build(), []
    raise UsageError("a graph source is required: --graph FILE or --construct KIND")


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="hypergraph file ('n r' format or plain edge list)")
    p.add_argument("--construct", metavar="KIND", help=f"one of {', '.join(KINDS)}")
    p.add_argument("--n", type=int, help="vertex count for --construct")
    p.add_argument("--m", type=int, help="block parameter m")
    p.add_argument("--r", dest="r_param", type=int, help="edge size r")
    p.add_argument("--s", type=int, help="base edge size s (hyper_upclosed)")
    p.add_argument("--construct-l", type=int, help="edge target l of the construction")
    p.add_argument("--allow-round", action="store_true", help="round non-integral block sizes")


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output is identical)")
    if seed:
        p.add_argument("--seed", type=int, help="random seed (drawn and recorded if omitted)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--stamp", action="store_true", help="record the wall-clock time in the manifest")


# ---------------------------------------------------------------- subcommands

def cmd_dist(args) -> int:
    H, inputs = _source_graph(args)
    if args.k is None:
        raise UsageError("--k is required")
    if args.samples is not None and args.exact:
        raise UsageError("give either --exact or --samples")
    if args.samples is None:
        dist = exact_joint_distribution(H, args.k, jobs=args.jobs)
        if args.format == "csv":
            emit(dist.to_csv(), args.out)
            return EXIT_OK
        body = {
            "mode": "exact",
            "distribution": dist.to_json_obj(),
            "marginal": {str(l): str(c) for l, c in dist.marginal().items()},
            "probability": {str(l): str(dist.probability(l)) for l in dist.marginal()},
        }
        seed = args.seed
    else:
        seed = resolve_seed(args)
        counts = sample_edge_counts(H, args.k, args.samples, seed, jobs=args.jobs)
        hist: dict[int, int] = {}
        for x in counts.tolist():
            hist[x] = hist.get(x, 0) + 1
        if args.format == "csv":
            emit("l,count\n" + "".join(f"{l},{c}\n" for l, c in sorted(hist.items())), args.out)
            return EXIT_OK
        body = {"mode": "sampled", "samples": args.samples,
                "histogram": {str(l): c for l, c in sorted(hist.items())}}
    body["manifest"] = make_manifest(args, inputs, seed).to_json_obj()
    emit(dump_json(body), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    H, inputs = _source_graph(args)
    seed = resolve_seed(args)
    est = monte_carlo_estimate(H, args.k, args.l, args.samples, seed, args.level, jobs=args.jobs)
    body = {"estimate": est.to_json_obj(), "l": args.l, "k": args.k,
            "manifest": make_manifest(args, inputs, seed).to_json_obj()}
    if args.target is not None:
        lo, hi = args.target - args.tolerance, args.target + args.tolerance
        body["target"] = {"value": args.target, "tolerance": args.tolerance,
                          "interval_meets_target": est.lo <= hi and est.hi >= lo}
    emit(dump_json(body), args.out)
    if args.target is not None and not body["target"]["interval_meets_target"]:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_construct(args) -> int:
    args.construct_l = args.l
    spec = _construction_from_args(args, args.kind)
    if spec.kind in ("gnp_one", "hyper_upclosed", "matching_gnp"):
        resolve_seed(args)
        spec = ConstructionSpec(**{**spec.to_dict(), "seed": args.seed})
    if args.law:
        law = _block_law(spec)
        body = {"construction": spec.to_dict(),
                "law": {str(l): str(p) for l, p in sorted(law.items())},
                "manifest": make_manifest(args, [], args.seed).to_json_obj()}
        emit(dump_json(body), args.out)
        return EXIT_OK
    H = spec.build()
    text = to_text(H, H.meta.get("construction"))
    emit(text, args.out)
    return EXIT_OK


def _block_law(spec: ConstructionSpec) -> dict:
    if spec.kind == "bipartite_kminus1":
        return bipartite_law(spec.n, spec.k, spec.allow_round)
    if spec.kind == "planted_clique":
        return clique_law(spec.n, spec.k, spec.m, 2, spec.allow_round)
    if spec.kind == "r_clique":
        return clique_law(spec.n, spec.k, spec.m, spec.r, spec.allow_round)
    raise UsageError(f"no exact block law for {spec.kind}")


def _corpus(items: list[str]) -> tuple[list, list]:
    """(named graphs, input files).  Items are files, directories of files,
    or ``catalog:N`` / ``catalog3:N`` for every isomorphism class."""
    from .search import catalog

    graphs, files = [], []
    for item in items:
        if item.startswith("catalog"):
            kind, _, n = item.partition(":")
            r = 3 if kind == "catalog3" else 2
            for i, H in enumerate(catalog(int(n), r)):
                graphs.append((f"{kind}{n}#{i}", H))
            continue
        path = Path(item)
        if path.is_dir():
            members = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
        elif path.is_file():
            members = [path]
        else:
            raise UsageError(f"corpus entry not found: {item}")
        for p in members:
            graphs.append((p.name, load(p)))
            files.append(p)
    if not graphs:
        raise UsageError("empty corpus")
    return graphs, files


def expand_specs(ids, n: int, r: int, ks=None, ls=None, cs=None, epss=None, zs=None,
                 assume_large_k: bool = False) -> list[BoundSpec]:
    """Cartesian grid of bound specs for graphs on n vertices."""
    from math import comb

    out = []
    for bid in ids:
        needs_c = bid in ("propo1", "propo2", "coro_o1")
        needs_eps = bid in ("propo3", "coro_o1", "thm_graph_o1_small", "thm_graph_o1_large",
                            "thm_hyper_o1", "lemma_B_pleasant")
        needs_z = bid == "lemma_B_nice"
        for k in (ks or range(1, n + 1)):
            top = sum(comb(k, s) for s in range(1, r + 1))
            for l in (ls or range(1, top + 1)):
                for c in (cs or [None]) if needs_c else [None]:
                    for eps in (epss or [None]) if needs_eps else [None]:
                        for z in (zs or [None]) if needs_z else [None]:
                            out.append(BoundSpec(bid, k, l, r, c=c, eps=eps, z=z,
                                                 assume_large_k=assume_large_k))
    return out


def cmd_check_bounds(args) -> int:
    graphs, files = _corpus(args.corpus)
    rows = []
    by_n: dict[int, list] = {}
    for name, H in graphs:
        by_n.setdefault(H.n, []).append((name, H))
    r = args.rank
    for n in sorted(by_n):
        specs = expand_specs(args.spec, n, r, args.k, args.l, args.c, args.eps, args.z,
                             args.assume_large_k)
        rows.extend(check_corpus(by_n[n], specs, jobs=args.jobs))
    order = {name: i for i, (name, _) in enumerate(graphs)}
    rows.sort(key=lambda row: order[row[0]])
    bad = [(name, rep) for name, rep in rows if rep.violated]
    counts: dict[str, int] = {}
    for _, rep in rows:
        counts[rep.status] = counts.get(rep.status, 0) + 1
    report = {
        "rows": [{"graph": name, **rep.to_json_obj()} for name, rep in rows],
        "summary": {"rows": len(rows), "by_status": counts, "violations": len(bad)},
        "manifest": make_manifest(args, files, None).to_json_obj(),
    }
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(dump_json(report))
        (d / "summary.csv").write_text(summary_csv(rows))
    if args.format == "json":
        emit(dump_json(report), args.out)
    else:
        emit(summary_csv(rows), args.out)
    for name, rep in bad[:20]:
        print(f"violation: {name} {rep.spec.to_dict()} observed={rep.observed} "
              f"status={rep.status}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_check_lemmas(args) -> int:
    from .prooflab import SUITES, run_suite

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    seed = args.seed if args.seed is not None else 0
    records = []
    for name in names:
        records.extend(run_suite(name, max_n=args.max_n, jobs=args.jobs, seed=seed,
                                 samples=args.samples))
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec.verdict] = counts.get(rec.verdict, 0) + 1
    args.seed = seed
    body = {
        "records": [rec.to_json_obj() for rec in records],
        "summary": counts,
        "manifest": make_manifest(args, [], seed).to_json_obj(),
    }
    emit(dump_json(body), args.out)
    fails = [rec for rec in records if rec.verdict == "fail"]
    for rec in fails[:20]:
        print(f"violation: {rec.lemma} {rec.instance}", file=sys.stderr)
    return EXIT_VIOLATION if fails else EXIT_OK


def _parse_range(text: str) -> list[int]:
    lo, _, hi = text.partition("-")
    return list(range(int(lo), int(hi or lo) + 1))


def cmd_search(args) -> int:
    from .search import SearchConfig, exhaustive_extremal, local_search, verify_monotone_in_n

    inputs = []
    if args.monotone:
        rep = verify_monotone_in_n(args.k, args.l, args.rank, _parse_range(args.monotone),
                                   jobs=args.jobs)
        body = {"monotone": rep.to_json_obj(),
                "manifest": make_manifest(args, [], None).to_json_obj()}
        emit(dump_json(body), args.out)
        return EXIT_OK if rep.passed else EXIT_VIOLATION
    if args.n is None:
        raise UsageError("--n is required")
    if args.method == "exhaustive":
        res = exhaustive_extremal(args.n, args.k, args.l, args.rank, jobs=args.jobs)
        seed = None
    else:
        cfg = SearchConfig.load(args.config) if args.config else SearchConfig()
        if args.config:
            inputs.append(args.config)
        overrides = {"method": args.method}
        if args.iterations is not None:
            overrides["iterations"] = args.iterations
        if args.restarts is not None:
            overrides["restarts"] = args.restarts
        cfg = SearchConfig.from_dict({**cfg.to_dict(), **overrides})
        seed = resolve_seed(args)
        res = local_search(args.n, args.k, args.l, args.rank, cfg, seed)
    body = res.to_json_obj()
    body["manifest"] = make_manifest(args, inputs, seed).to_json_obj()
    text = dump_json(body)
    if args.out_dir:
        path = Path(args.out_dir) / res.file_name()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    emit(text, args.out)
    return EXIT_OK


def construction_targets(samples: int = 100_000, seed: int = 20240601, jobs: int = 1) -> dict:
    """The three construction probability targets near 1/e."""
    from .bounds import BoundValue
    from .constructions import gnp_for_ell_one, hypergeometric_pmf
    from .exact import IV, iv_bounds
    from .prooflab import max_pj_sweep

    e_inv = BoundValue.from_iv(1 / IV.e)
    out = {}
    # exactly one of the 40 sampled vertices in the 1000-vertex part
    p = hypergeometric_pmf(40_000, 1000, 40, 1)
    out["bipartite_kminus1"] = {
        "n": 40_000, "k": 40, "small_part_hits": 1, "probability": str(p),
        "probability_approx": f"{float(p):.12g}",
        "distance_to_inv_e_approx": f"{abs(float(p) - float(e_inv)):.12g}",
        "pass": abs(p - e_inv.lo) + (e_inv.hi - e_inv.lo) <= Fraction(1, 50),
    }
    G = gnp_for_ell_one(3000, 30, seed)
    est = monte_carlo_estimate(G, 30, 1, samples, seed, 0.99, jobs=jobs)
    lo_t, hi_t = float(e_inv.lo) - 0.03, float(e_inv.hi) + 0.03
    out["gnp_for_ell_one"] = {
        "n": 3000, "k": 30, "l": 1, "graph_seed": seed, "estimate": est.to_json_obj(),
        "pass": est.lo <= hi_t and est.hi >= lo_t,
    }
    n, k = 100_000, 100
    xs = sorted(set(range(0, n + 1, 997)) | set(range(n // k - 200, n // k + 201)))
    best, bx, bj = max_pj_sweep(n, k, xs)
    limit = iv_bounds(1 / IV.e + IV.mpf(1) / 50)[0]
    out["pj_sweep"] = {"n": n, "k": k, "grid_points": len(xs), "max_pj": str(best),
                       "max_pj_approx": f"{float(best):.12g}", "argmax": [bx, bj],
                       "pass": best <= limit}
    return out


def cmd_report(args) -> int:
    body: dict = {}
    inputs = []
    ok = True
    if args.targets:
        seed = args.seed if args.seed is not None else 20240601
        args.seed = seed
        body["targets"] = construction_targets(args.samples, seed, args.jobs)
        ok &= all(t["pass"] for t in body["targets"].values())
    if args.artifacts:
        rows = []
        for item in args.artifacts:
            path = Path(item)
            if not path.is_file():
                raise UsageError(f"artifact not found: {path}")
            inputs.append(path)
            obj = json.loads(path.read_text())
            man = obj.get("manifest", {})
            status = _artifact_status(obj)
            ok &= status != "fail"
            rows.append({"file": str(path), "subcommand": man.get("subcommand"),
                         "seed": man.get("seed"), "status": status})
        body["artifacts"] = rows
    if not body:
        raise UsageError("nothing to report: pass artifact files or --targets")
    body["manifest"] = make_manifest(args, inputs, args.seed).to_json_obj()
    if args.format == "csv":
        lines = ["name,status"]
        for name, t in sorted(body.get("targets", {}).items()):
            lines.append(f"{name},{'pass' if t['pass'] else 'fail'}")
        for row in body.get("artifacts", []):
            lines.append(f"{row['file']},{row['status']}")
        emit("\n".join(lines) + "\n", args.out)
    else:
        emit(dump_json(body), args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _artifact_status(obj: dict) -> str:
    if "records" in obj:
        return "fail" if obj["summary"].get("fail") else "pass"
    if "rows" in obj:
        return "fail" if obj["summary"]["violations"] else "pass"
    if "monotone" in obj:
        return "pass" if obj["monotone"]["pass"] else "fail"
    if "target" in obj:
        return "pass" if obj["target"]["interval_meets_target"] else "fail"
    if "targets" in obj:
        return "pass" if all(t["pass"] for t in obj["targets"].values()) else "fail"
    return "info"


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edgestat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"edgestat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="distribution of induced edge counts of k-subsets")
    _add_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="exact enumeration (default)")
    p.add_argument("--samples", type=int, help="sample this many subsets instead")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("sample", help="Monte Carlo estimate of P[e(A) = l] with a Wilson interval")
    _add_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--level", type=float, default=0.99)
    p.add_argument("--target", type=float, help="exit 1 unless the interval meets target +- tolerance")
    p.add_argument("--tolerance", type=float, default=0.0)
    _add_common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("construct", help="build a construction and write it as a graph file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--r", dest="r_param", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--allow-round", action="store_true")
    p.add_argument("--law", action="store_true", help="emit the exact edge-count law instead")
    _add_common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check-bounds", help="check count-form bounds on a corpus")
    p.add_argument("--corpus", action="append", required=True,
                   help="file, directory, or catalog:N / catalog3:N (repeatable)")
    p.add_argument("--spec", action="append", required=True, choices=BOUND_IDS)
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--l", type=int, action="append")
    p.add_argument("--rank", type=int, default=2, help="rank bound r of the statements")
    p.add_argument("--c", type=_fraction, action="append")
    p.add_argument("--eps", type=_fraction, action="append")
    p.add_argument("--z", type=_fraction, action="append")
    p.add_argument("--assume-large-k", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out-dir", help="also write report.json and summary.csv here")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("check-lemmas", help="run an exact small-instance suite")
    p.add_argument("suite", help="all, rho-identity, per-set, pairs, envelope, pj, random-b")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--samples", type=int, default=100_000,
                   help="random rank-3 subsets for the envelope suite")
    _add_common(p)
    p.set_defaults(func=cmd_check_lemmas)

    p = sub.add_parser("search", help="exhaustive or heuristic maximization of I(n, k, l)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--method", choices=("exhaustive", "local", "anneal"), default="exhaustive")
    p.add_argument("--config", help="JSON search config")
    p.add_argument("--iterations", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--monotone", metavar="N1-N2", help="check I(n, k, l) is nonincreasing over n")
    p.add_argument("--out-dir", help="results directory")
    _add_common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("report", help="summarize artifacts or compute construction targets")
    p.add_argument("artifacts", nargs="*")
    p.add_argument("--targets", action="store_true")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "jobs", 1) < 1:
        print("edgestat: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, HypergraphError, WorkTooLarge, Inapplicable, ValueError, OSError,
            KeyError, json.JSONDecodeError) as exc:
        print(f"edgestat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
