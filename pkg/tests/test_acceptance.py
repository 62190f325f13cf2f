"""Desk-scale acceptance runs, one test per criterion.

Each test records a single pass/fail line that pytest prints in its
terminal summary under "acceptance criteria".
"""

from __future__ import annotations

import gc
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from rpleb import ExactNnIndex, ExhaustiveIndex, HashSpec, PointSet, RnnIndex
from rpleb.cli import run_queries, scaling_slope, write_query_report
from rpleb.explore import inv_phi1_cap, parse_grid, rho_bound, sweep
from rpleb.io import load_index, save_index, write_points
from rpleb.metric import all_nn_distances, pairwise_distances
from rpleb.oracle import bichromatic_nn_distances, oracle_nn, oracle_range, oracle_rnn, oracle_rnn_bichromatic
from rpleb.stablehash import DEFAULT_C, lift_geometry, lifted_eps, phi_value, sample_hash_vector

pytestmark = pytest.mark.slow


def planted_queries(X: np.ndarray, r: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Queries at a uniform distance in [0, r] from randomly chosen data points."""
    base = X[rng.integers(0, X.shape[0], count)]
    u = rng.standard_normal(base.shape)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return base + u * (r * rng.random((count, 1)))


def test_exhaustive_recall(acceptance_line):
    rng = np.random.default_rng(101)
    n, d, eps, r = 2000, 16, 0.5, 0.6
    ps = PointSet(rng.random((n, d)))
    Q = planted_queries(ps.coords, r, 1000, rng)
    t0 = time.perf_counter()
    idx = ExhaustiveIndex(ps, r, eps, HashSpec(s=2.0, seed=1), lifted=True, c=DEFAULT_C)
    equal = sound = 0
    for q in Q:
        out = idx.query(q)
        want = oracle_range(ps, q, r).ids
        equal += out == want
        sound += out <= want
    secs = time.perf_counter() - t0
    del idx
    gc.collect()
    ok = equal >= 990 and sound == 1000 and secs <= 300
    acceptance_line(1, ok, f"exhaustive r-PLEB equal {equal}/1000, sound {sound}/1000, {secs:.0f}s")
    assert ok


def test_lifting_identities(acceptance_line):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(10_000):
        s = float(rng.choice([1.0, 2.0]))
        dim = int(rng.integers(1, 8))
        p, q = rng.standard_normal(dim), rng.standard_normal(dim)
        r = float(np.exp(rng.uniform(-3, 3)))
        eps = float(np.exp(rng.uniform(-3, 2)))
        r_prime, coord = lift_geometry(r, eps, s)
        eps_prime = lifted_eps(eps, s)
        d = float(np.sum(np.abs(p - q) ** s) ** (1 / s))
        d_lift = (d**s + coord**s) ** (1 / s)
        # (i) d <= r iff d' <= r': the lifted gap d'^s - r'^s equals d^s - r^s
        worst = max(worst, abs((d_lift**s - r_prime**s) - (d**s - r**s)) / max(d**s, r**s, r_prime**s))
        # (ii) every lifted distance is at least r'/(1+eps), reached at d = 0
        worst = max(worst, abs(coord - r_prime / (1 + eps)) / coord)
        # (iii) d' <= r'(1+eps') implies d <= r(1+eps): the two thresholds correspond
        at_edge = ((r * (1 + eps)) ** s + coord**s) ** (1 / s)
        worst = max(worst, abs(at_edge - r_prime * (1 + eps_prime)) / at_edge)
    order_ok = 0
    for _ in range(1000):
        s = float(rng.choice([1.0, 2.0]))
        X, q = rng.random((30, 4)), rng.random(4)
        r, eps = float(rng.uniform(0.1, 2)), float(rng.uniform(0.05, 3))
        _, coord = lift_geometry(r, eps, s)
        plain = pairwise_distances(q[None, :], X, s)[0]
        lifted = pairwise_distances(np.append(q, coord)[None, :], np.hstack([X, np.zeros((30, 1))]), s)[0]
        order_ok += np.array_equal(np.argsort(plain, kind="stable"), np.argsort(lifted, kind="stable"))
    ok = worst <= 1e-9 and order_ok == 1000
    acceptance_line(2, ok, f"lifting identities worst relative error {worst:.1e}, order kept {order_ok}/1000")
    assert ok


def test_collision_model(acceptance_line):
    draws = 100_000
    worst = 0.0
    for s in (1.0, 2.0):
        for w in (1.0, 4.0):
            for l in (0.5, 1.0, 2.0):
                g = sample_hash_vector(HashSpec(s=s, w=w, seed=int(10 * l + w + 100 * s)), draws, 3, 0, 0)
                p = np.zeros(3)
                direction = np.array([1.0, 2.0, -1.0])
                q = p + l * direction / np.sum(np.abs(direction) ** s) ** (1 / s)
                kp = np.floor((g.directions @ p + g.offsets) / w)
                kq = np.floor((g.directions @ q + g.offsets) / w)
                rate = float(np.mean(kp == kq))
                model = phi_value(l, w, s)
                se = math.sqrt(model * (1 - model) / draws)
                worst = max(worst, abs(rate - model) / se)
    ok = worst <= 3.0
    acceptance_line(3, ok, f"collision rates within {worst:.2f} standard errors of the model (12 settings)")
    assert ok


def test_parameter_curves(acceptance_line):
    grid = parse_grid("0.05:10:200")
    failures = []
    for s in (1.0, 2.0):
        for row in sweep(grid, s):
            checks = [row.rho <= rho_bound(row.eps, s), row.alpha <= row.eps * row.rho,
                      row.inv_phi1 <= inv_phi1_cap(s), row.bound_ok, row.w == max(1.0, row.eps)]
            if s == 1.0:
                checks.append(row.inv_log_p2 <= 1.0)
            if not all(checks):
                failures.append((s, row.eps))
    ok = not failures
    acceptance_line(4, ok, f"parameter caps hold on {2 * len(grid) - len(failures)}/{2 * len(grid)} grid rows")
    assert ok


def test_exact_nn(acceptance_line):
    rng = np.random.default_rng(105)
    ps = PointSet(rng.random((2000, 16)))
    # a window of 4 keeps the per-radius tables small enough for a laptop
    idx = ExactNnIndex(ps, 0.5, HashSpec(s=2.0, w=4.0, seed=5))
    good = 0
    for q in rng.random((1000, 16)):
        p = idx.query(q)
        good += float(ps.distances_to(q, [p])[0]) == oracle_nn(ps, q).dist
    del idx
    gc.collect()
    ok = good >= 990
    acceptance_line(5, ok, f"exact NN distance matches the oracle in {good}/1000 queries")
    assert ok


def rnn_queries(X: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Half uniform in the bounding box, half near data points."""
    half = count // 2
    lo, hi = X.min(axis=0), X.max(axis=0)
    uniform = lo + (hi - lo) * rng.random((half, X.shape[1]))
    nn = all_nn_distances(PointSet(X))[0] if X.shape[0] > 1 else np.ones(1)
    near = planted_queries(X, float(np.median(nn)), count - half, rng)
    return np.vstack([uniform, near])


def test_monochromatic_rnn(acceptance_line):
    rng = np.random.default_rng(106)
    eps = 0.5
    ps = PointSet(rng.random((1000, 8)))
    idx = RnnIndex(ps, eps, HashSpec(s=2.0, seed=6))
    nn = idx.nn_dist
    cap = math.ceil(math.log((1 + eps) / eps, 1 + eps)) + 2
    equal = sound = window = nonempty = 0
    for q in rnn_queries(ps.coords, 500, rng):
        out, rep = idx.query_with_report(q)
        want = oracle_rnn(ps, q, nn).ids
        equal += out == want
        nonempty += bool(want)
        sound += all(float(ps.distances_to(q, [p])[0]) <= nn[p] for p in out)
        window += rep.buckets_probed <= cap
    del idx
    gc.collect()
    ok = equal >= 495 and sound == 500 and window == 500
    acceptance_line(6, ok, f"mono RNN equal {equal}/500 ({nonempty} non-empty), sound {sound}/500, "
                           f"window <= {cap} in {window}/500")
    assert ok


def test_bichromatic_rnn(acceptance_line):
    rng = np.random.default_rng(107)
    B, Y = PointSet(rng.random((500, 8))), PointSet(rng.random((500, 8)))
    idx = RnnIndex(B, 0.5, HashSpec(s=2.0, seed=7), competitors=Y)
    nn = bichromatic_nn_distances(B, Y)
    equal = nonempty = 0
    for q in rnn_queries(np.vstack([B.coords, Y.coords]), 500, rng):
        want = oracle_rnn_bichromatic(B, Y, q, nn).ids
        equal += idx.query(q) == want
        nonempty += bool(want)
    del idx
    gc.collect()
    ok = equal >= 495
    acceptance_line(7, ok, f"bichromatic RNN equal {equal}/500 ({nonempty} non-empty)")
    assert ok


def test_output_sensitivity(acceptance_line):
    rng = np.random.default_rng(108)
    d, eps, target = 16, 1.0, 5
    spec = HashSpec(s=2.0, w=4.0, seed=8)
    ns, costs, lines, caps_ok = [], [], [], True
    for n in (500, 2000, 8000):
        X = rng.random((n, d))
        ps = PointSet(X)
        Q = rng.random((200, d))
        # radius with about `target` points inside, so the output size stays level across n
        r = float(np.median(np.sort(pairwise_distances(Q, X, 2.0), axis=1)[:, target - 1]))
        idx = ExhaustiveIndex(ps, r, eps, spec, lifted=True)
        outside = cost = 0.0
        for q in Q:
            _, rep = idx.query_with_report(q)
            outside += rep.collisions_outside
            cost += rep.hash_evaluations + rep.collisions + rep.distance_evaluations
        outside /= len(Q)
        cost /= len(Q)
        cap = 2 * idx.L * idx.n_groups
        caps_ok &= outside <= cap
        ns.append(n)
        costs.append(cost)
        lines.append(f"n={n} outside {outside:.0f} <= {cap}")
        del idx
        gc.collect()
    slope = scaling_slope(ns, costs)
    ok = caps_ok and slope <= 1.0
    acceptance_line(8, ok, f"{'; '.join(lines)}; cost slope {slope:.2f}")
    assert ok


def test_snapshot_determinism(acceptance_line, tmp_path):
    rng = np.random.default_rng(109)
    X = rng.random((400, 6))
    spec = HashSpec(s=2.0, w=4.0, seed=9)
    Q = rng.random((100, 6))
    builds = {
        "expleb": ExhaustiveIndex(PointSet(X), 0.4, 0.5, spec),
        "exactnn": ExactNnIndex(PointSet(X), 0.5, spec),
        "rnn": RnnIndex(PointSet(X), 0.5, spec),
    }
    round_trip = True
    for kind, idx in builds.items():
        a, b = tmp_path / f"{kind}-mem.csv", tmp_path / f"{kind}-disk.csv"
        write_query_report(a, run_queries(idx, Q))
        save_index(tmp_path / f"{kind}.npz", idx)
        write_query_report(b, run_queries(load_index(tmp_path / f"{kind}.npz"), Q))
        round_trip &= a.read_bytes() == b.read_bytes()
    write_points(tmp_path / "P.bin", X)
    np.savetxt(tmp_path / "Q.csv", Q, delimiter=",")
    runs = []
    for i in range(2):
        subprocess.run([sys.executable, "-m", "rpleb.cli", "build", "--input", str(tmp_path / "P.bin"),
                        "--kind", "rnn", "--eps", "0.5", "--s", "2", "--w", "4", "--seed", "9",
                        "--out", str(tmp_path / f"proc{i}.npz")], check=True)
        subprocess.run([sys.executable, "-m", "rpleb.cli", "query", "--index", str(tmp_path / f"proc{i}.npz"),
                        "--queries", str(tmp_path / "Q.csv"), "--report", str(tmp_path / f"proc{i}.csv")],
                       check=True)
        runs.append((tmp_path / f"proc{i}.csv").read_bytes())
    across = runs[0] == runs[1]
    ok = round_trip and across
    acceptance_line(9, ok, f"snapshot round trip byte-equal: {round_trip}; two processes agree: {across}")
    assert ok
