from __future__ import annotations

import numpy as np
import pytest

from rpleb import PointSet
from rpleb.oracle import (bichromatic_nn_distances, oracle_eps_rnn, oracle_nn, oracle_range, oracle_rnn,
                          oracle_rnn_bichromatic)


class TestOracleNn:
    def test_identity_query(self):
        ps = PointSet([[0.0, 0.0], [2.0, 0.0]])
        ans = oracle_nn(ps, [2.0, 0.0])
        assert ans.dist == 0.0 and ans.ids == {1}

    def test_line(self):
        ps = PointSet([[0.0], [1.0], [3.0]])
        ans = oracle_nn(ps, [2.2])
        assert ans.ids == {2} and ans.dist == pytest.approx(0.8)

    def test_tie_set(self):
        ps = PointSet([[-1.0], [1.0]])
        assert oracle_nn(ps, [0.0]).ids == {0, 1}


class TestOracleRange:
    def test_zero_radius_keeps_duplicate(self):
        ps = PointSet([[1.0], [1.0], [5.0]])
        assert oracle_range(ps, [1.0], 0.0, exclude=0).ids == {1}

    def test_small_radius_is_empty(self):
        assert oracle_range(PointSet([[0.0], [3.0]]), [1.5], 1.0).ids == frozenset()

    def test_planted_cluster(self):
        X = np.vstack([np.zeros((3, 2)) + 0.1 * np.arange(3)[:, None], np.full((4, 2), 9.0)])
        assert oracle_range(PointSet(X), [0.0, 0.0], 1.0).ids == {0, 1, 2}


class TestOracleRnn:
    def test_mutual_pair_with_query_between(self):
        # 0 and 1 are mutual nearest neighbors; q sits between them
        ps = PointSet([[0.0], [2.0], [10.0]])
        assert oracle_rnn(ps, [1.0]).ids == {0, 1}

    def test_far_query(self):
        ps = PointSet([[0.0], [1.0]])
        assert oracle_rnn(ps, [100.0]).ids == frozenset()

    def test_eps_zero_limit_and_monotone(self, rng):
        ps = PointSet(rng.random((40, 3)))
        q = rng.random(3)
        base = oracle_rnn(ps, q).ids
        assert oracle_eps_rnn(ps, q, 0.0).ids == base
        prev = base
        for e in (0.1, 0.5, 1.0, 3.0):
            cur = oracle_eps_rnn(ps, q, e).ids
            assert prev <= cur
            prev = cur

    def test_eps_rnn_brute_force(self, rng):
        X = rng.random((25, 2))
        ps, q, eps = PointSet(X), rng.random(2), 0.3
        want = set()
        for p in range(25):
            others = [np.linalg.norm(X[p] - X[o]) for o in range(25) if o != p]
            dq = np.linalg.norm(X[p] - q)
            if dq <= (1 + eps) * min(min(others), dq):
                want.add(p)
        assert oracle_eps_rnn(ps, q, eps).ids == want


class TestBichromatic:
    def test_single_pair(self):
        blue, yellow = PointSet([[0.0]]), PointSet([[2.0]])
        assert oracle_rnn_bichromatic(blue, yellow, [1.0]).ids == {0}
        assert oracle_rnn_bichromatic(blue, yellow, [-2.5]).ids == frozenset()

    def test_same_sets_use_no_exclusion(self):
        X = np.array([[0.0], [1.0]])
        assert np.all(bichromatic_nn_distances(PointSet(X), PointSet(X)) == 0)

    def test_query_on_yellow_point(self, rng):
        B, Y = PointSet(rng.random((30, 2))), PointSet(rng.random((10, 2)))
        q = Y.coords[3]
        dB = bichromatic_nn_distances(B, Y)
        want = {b for b in range(30) if np.linalg.norm(B.coords[b] - q) <= dB[b]}
        assert oracle_rnn_bichromatic(B, Y, q).ids == want
