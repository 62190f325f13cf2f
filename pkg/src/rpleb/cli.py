"""Command-line interface: build, query, explore and bench.

Exit codes are 0 on success, 1 when an oracle check, bound or acceptance
flag fails, and 2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError
from .exactnn import ExactNnIndex
from .exhaustive import ExhaustiveIndex, QueryReport
from .explore import SweepRow, parse_grid, sweep
from .io import KINDS, Index, kind_of, load_index, read_points, save_index
from .metric import PointSet
from .oracle import (bichromatic_nn_distances, nn_distances, oracle_nn, oracle_range, oracle_rnn,
                     oracle_rnn_bichromatic)
from .pleb import PlebIndex
from .rnn import RnnIndex
from .stablehash import HashSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "RPLEB_SEED"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class QueryRow:
    query: int
    answer: str
    collisions_inside: int
    collisions_outside: int
    distance_evaluations: int
    hash_evaluations: int
    oracle_match: str  # "1", "0" or "" when not checked

    HEADER = ("query", "answer", "collisions_inside", "collisions_outside",
              "distance_evaluations", "hash_evaluations", "oracle_match")

    def values(self) -> tuple[object, ...]:
        return (self.query, self.answer, self.collisions_inside, self.collisions_outside,
                self.distance_evaluations, self.hash_evaluations, self.oracle_match)


def _ids(ids) -> str:
    return " ".join(str(i) for i in sorted(ids))


def _resolve_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return seed
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# -- query plumbing -------------------------------------------------------------

def _make_answerer(index: Index, oracle: bool) -> Callable[[int, np.ndarray], QueryRow]:
    """Return a function answering one query of the index's kind as a report row."""
    kind = kind_of(index)
    if kind in ("rnn", "rnn-bi") and index.n == 0:
        return lambda i, q: QueryRow(i, "", 0, 0, 0, 0, "1" if oracle else "")
    if kind == "rnn":
        nn = nn_distances(index.points) if oracle else None
    elif kind == "rnn-bi":
        blue = PointSet(index.coords, index.s)
        nn = bichromatic_nn_distances(blue, index.competitors) if oracle else None

    def flag(ok: bool) -> str:
        return ("1" if ok else "0") if oracle else ""

    def answer(i: int, q: np.ndarray) -> QueryRow:
        if kind == "pleb":
            a = index.query(q)
            ok = True
            if oracle:
                near = oracle_range(index.ps, q, index.r).ids
                ok = (a.found and a.dist <= index.r * (1 + index.eps)) if near else (
                    not a.found or a.dist <= index.r * (1 + index.eps))
            return QueryRow(i, "" if a.point is None else str(a.point), 0, 0, a.collisions,
                            a.tables_probed * index.params.k, flag(ok))
        if kind == "expleb":
            out, rep = index.query_with_report(q)
            ok = oracle and out == oracle_range(index.ps, q, index.r).ids
            return _row(i, _ids(out), rep, flag(ok))
        if kind == "exactnn":
            p, rep = index.query_with_report(q)
            ok = oracle and float(index.ps.distances_to(q, [p])[0]) == oracle_nn(index.ps, q).dist
            return _row(i, str(p), rep.exhaustive, flag(ok))
        out, rep = index.query_with_report(q)
        if oracle:
            want = (oracle_rnn(index.points, q, nn) if kind == "rnn"
                    else oracle_rnn_bichromatic(blue, index.competitors, q, nn)).ids
        ok = oracle and out == want
        return _row(i, _ids(out), rep.exhaustive, flag(ok))

    return answer


def _row(i: int, answer: str, rep: QueryReport, match: str) -> QueryRow:
    return QueryRow(i, answer, rep.collisions_inside, rep.collisions_outside,
                    rep.distance_evaluations, rep.hash_evaluations, match)


def run_queries(index: Index, queries: np.ndarray, oracle: bool = False, workers: int = 1) -> list[QueryRow]:
    """Answer every query; rows come back in query order whatever the worker count."""
    answer = _make_answerer(index, oracle)
    jobs = list(enumerate(queries))
    if workers <= 1:
        return [answer(i, q) for i, q in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda iq: answer(*iq), jobs))


def write_query_report(path: Path, rows: Sequence[QueryRow]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(QueryRow.HEADER)
        for r in rows:
            w.writerow(r.values())


# -- commands -------------------------------------------------------------------

def _load_points(path: str, s: float | None, dim: int | None = None) -> np.ndarray:
    pf = read_points(path)
    if pf.n and dim is not None and pf.dim != dim:
        raise InvalidInputError(f"{path}: points have dimension {pf.dim}, index expects {dim}")
    if pf.s is not None and s is not None and pf.s != s:
        raise InvalidInputError(f"{path}: file records s={pf.s:g} but s={s:g} was requested")
    return pf.coords if pf.n or dim is None else np.empty((0, dim))


def cmd_build(args: argparse.Namespace) -> int:
    spec = HashSpec(s=args.s, w=args.w, seed=_resolve_seed(args.seed))
    coords = _load_points(args.input, args.s)
    if args.kind in ("pleb", "expleb") and args.r is None:
        raise UsageError(f"--r is required for --kind {args.kind}")
    if args.kind == "rnn-bi":
        if args.yellow is None:
            raise UsageError("--yellow is required for --kind rnn-bi")
        yellow = PointSet(_load_points(args.yellow, args.s), args.s)
        blue = PointSet(coords, args.s) if coords.shape[0] else np.empty((0, yellow.dim))
        index: Index = RnnIndex(blue, args.eps, spec, competitors=yellow)
    else:
        ps = PointSet(coords, args.s)
        if args.kind == "pleb":
            index = PlebIndex(ps, args.r, args.eps, spec)
        elif args.kind == "expleb":
            index = ExhaustiveIndex(ps, args.r, args.eps, spec, lifted=not args.no_lift)
        elif args.kind == "exactnn":
            index = ExactNnIndex(ps, args.eps, spec, lifted=not args.no_lift)
        else:
            index = RnnIndex(ps, args.eps, spec)
    save_index(args.out, index)
    return EXIT_OK


def _index_dim(index: Index) -> int:
    return index.competitors.dim if isinstance(index, RnnIndex) else index.ps.dim


def cmd_query(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    queries = _load_points(args.queries, None, _index_dim(index))
    rows = run_queries(index, queries, oracle=args.oracle_check, workers=args.workers)
    if args.report:
        write_query_report(Path(args.report), rows)
    else:
        for r in rows:
            print(f"{r.query}\t{r.answer}")
    if args.oracle_check and rows:
        recall = sum(r.oracle_match == "1" for r in rows) / len(rows)
        print(f"oracle agreement {recall:.4f} over {len(rows)} queries", file=sys.stderr)
        if recall < args.min_agreement:
            return EXIT_FAIL
    return EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    rows = sweep(parse_grid(args.eps_grid), args.s, lifted=not args.no_lift)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SweepRow.header())
        for r in rows:
            w.writerow(r.values())
    bad = [r.eps for r in rows if not r.all_ok]
    if bad:
        print(f"{len(bad)} rows break a cap, first at eps={bad[0]:g}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _bench_one(path: str, queries_path: str) -> dict[str, object]:
    index = load_index(path)
    queries = _load_points(queries_path, None, _index_dim(index))
    answer = _make_answerer(index, oracle=False)
    t0 = time.perf_counter()
    rows = [answer(i, q) for i, q in enumerate(queries)]
    secs = time.perf_counter() - t0
    nq = max(len(rows), 1)
    cost = sum(r.hash_evaluations + r.collisions_inside + r.collisions_outside + r.distance_evaluations
               for r in rows) / nq
    outside = sum(r.collisions_outside for r in rows) / nq
    if isinstance(index, ExhaustiveIndex):
        cap = 2 * index.L * index.n_groups
        n = index.ps.n
    else:
        cap = math.nan
        n = index.n if isinstance(index, RnnIndex) else index.ps.n
    return {"index": path, "kind": kind_of(index), "n": n, "queries": len(rows), "seconds": secs,
            "queries_per_second": len(rows) / secs if secs > 0 else math.inf,
            "mean_cost": cost, "mean_outside_collisions": outside, "outside_cap": cap,
            "outside_ok": bool(math.isnan(cap) or outside <= cap)}


def scaling_slope(ns: Sequence[float], costs: Sequence[float]) -> float:
    """Least-squares slope of log(cost) against log(n)."""
    return float(np.polyfit(np.log(ns), np.log(costs), 1)[0])


def cmd_bench(args: argparse.Namespace) -> int:
    results = [_bench_one(p, args.queries) for p in args.index]
    slope = math.nan
    if len({r["n"] for r in results}) >= 2:
        slope = scaling_slope([r["n"] for r in results], [r["mean_cost"] for r in results])
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        keys = list(results[0]) + ["n_scaling_slope"]
        w.writerow(keys)
        for r in results:
            w.writerow([*r.values(), "" if math.isnan(slope) else slope])
    ok = all(r["outside_ok"] for r in results) and (math.isnan(slope) or slope <= 1.0)
    return EXIT_OK if ok else EXIT_FAIL


# -- argument parsing -----------------------------------------------------------

def _s_value(text: str) -> float:
    if text not in ("1", "2"):
        raise argparse.ArgumentTypeError("s must be 1 or 2")
    return float(text)


def _seed_value(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpleb", description="LSH indexes for PLEB, exact NN and RNN queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build an index from a point file and save a snapshot")
    b.add_argument("--input", required=True, help="point file (CSV or binary)")
    b.add_argument("--kind", required=True, choices=KINDS)
    b.add_argument("--eps", required=True, type=float)
    b.add_argument("--s", required=True, type=_s_value)
    b.add_argument("--w", type=float, default=None, help="window width (default max(1, eps))")
    b.add_argument("--seed", type=_seed_value, default=0, help=f"hash seed ({SEED_ENV} overrides)")
    b.add_argument("--no-lift", action="store_true", help="skip the lifting embedding")
    b.add_argument("--r", type=float, default=None, help="radius for pleb and expleb")
    b.add_argument("--yellow", help="competitor point file for rnn-bi")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer a query file against a snapshot")
    q.add_argument("--index", required=True)
    q.add_argument("--queries", required=True)
    q.add_argument("--oracle-check", action="store_true", help="compare every answer to brute force")
    q.add_argument("--min-agreement", type=float, default=0.99)
    q.add_argument("--report", help="per-query CSV report")
    q.add_argument("--workers", type=int, default=1)
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("explore", help="tabulate p0, p1, p2, rho and alpha over an eps grid")
    e.add_argument("--s", required=True, type=_s_value)
    e.add_argument("--eps-grid", required=True, help="lo:hi:steps, log-spaced")
    e.add_argument("--no-lift", action="store_true")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_explore)

    p = sub.add_parser("bench", help="latency and collision statistics for one or more snapshots")
    p.add_argument("--index", required=True, nargs="+")
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"rpleb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
