"""Brute-force reference answers for every query type.

Everything here is an exhaustive scan with no randomness; the LSH
structures are tested against these functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from .errors import NoNeighborError
from .metric import PointSet, all_nn_distances, pairwise_distances


@dataclass(frozen=True)
class OracleAnswer:
    kind: str  # nn | ann-set | range | rnn | rnn-bichromatic
    ids: frozenset[int] = field(default_factory=frozenset)
    dist: float | None = None


def oracle_nn(ps: PointSet, q: ArrayLike, exclude: int | None = None) -> OracleAnswer:
    """All exact minimizers of ``d(q, p)``; ``exclude`` drops one id (when q is a data point)."""
    d = ps.distances_to(ps.point(q))
    if exclude is not None:
        d[exclude] = np.inf
    if not np.isfinite(d).any():
        raise NoNeighborError("no candidate point left")
    m = float(d.min())
    return OracleAnswer("nn", frozenset(np.flatnonzero(d == m).tolist()), m)


def oracle_ann_set(ps: PointSet, q: ArrayLike, eps: float) -> OracleAnswer:
    """Ids within ``(1 + eps) d(q, P)`` of ``q``."""
    d = ps.distances_to(ps.point(q))
    m = float(d.min())
    return OracleAnswer("ann-set", frozenset(np.flatnonzero(d <= (1.0 + eps) * m).tolist()), m)


def oracle_range(ps: PointSet, q: ArrayLike, r: float, exclude: int | None = None) -> OracleAnswer:
    d = ps.distances_to(ps.point(q))
    hit = d <= r
    if exclude is not None:
        hit[exclude] = False
    return OracleAnswer("range", frozenset(np.flatnonzero(hit).tolist()))


def nn_distances(ps: PointSet) -> np.ndarray:
    """``d(p, P minus p)`` for every point (infinite for a singleton set)."""
    if ps.n < 2:
        return np.full(ps.n, np.inf)
    return all_nn_distances(ps)[0]


def oracle_rnn(ps: PointSet, q: ArrayLike, nn_dist: np.ndarray | None = None) -> OracleAnswer:
    """Points ``p`` with ``d(p, q) <= d(p, P minus p)``: q is among p's nearest once adjoined."""
    if nn_dist is None:
        nn_dist = nn_distances(ps)
    d = ps.distances_to(ps.point(q))
    return OracleAnswer("rnn", frozenset(np.flatnonzero(d <= nn_dist).tolist()))


def oracle_eps_rnn(ps: PointSet, q: ArrayLike, eps: float, nn_dist: np.ndarray | None = None) -> OracleAnswer:
    """Points ``p`` with ``d(p, q) <= (1 + eps) d(p, (P + q) minus p)``."""
    if nn_dist is None:
        nn_dist = nn_distances(ps)
    d = ps.distances_to(ps.point(q))
    competitor = np.minimum(nn_dist, d)
    return OracleAnswer("rnn", frozenset(np.flatnonzero(d <= (1.0 + eps) * competitor).tolist()))


def bichromatic_nn_distances(blue: PointSet, yellow: PointSet) -> np.ndarray:
    """``d(b, Y)`` for every blue point, with no exclusion across colours."""
    out = np.empty(blue.n)
    for lo in range(0, blue.n, 512):
        hi = min(blue.n, lo + 512)
        out[lo:hi] = pairwise_distances(blue.coords[lo:hi], yellow.coords, blue.s).min(axis=1)
    return out


def oracle_rnn_bichromatic(blue: PointSet, yellow: PointSet, q: ArrayLike,
                           nn_dist: np.ndarray | None = None) -> OracleAnswer:
    """Blue points ``b`` with ``d(b, q) <= d(b, Y)``."""
    if blue.n == 0:
        return OracleAnswer("rnn-bichromatic")
    if nn_dist is None:
        nn_dist = bichromatic_nn_distances(blue, yellow)
    d = blue.distances_to(blue.point(q))
    return OracleAnswer("rnn-bichromatic", frozenset(np.flatnonzero(d <= nn_dist).tolist()))
