"""Reverse nearest neighbors, monochromatic and bichromatic.

Data points are bucketed by nearest-neighbor distance, bucket ``i`` holding
``(1+eps)^(i-1) <= d_nn < (1+eps)^i``. A query finds an eps-NN ``y`` on
the ladder, runs exhaustive PLEB queries on the buckets inside a window set
by ``d(q, y)``, takes the tail of the precomputed reverse-eps-NN array of
``y``, and finally keeps the candidates with ``d(p, q) <= d_nn(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateLadderError, InvalidInputError, NoNeighborInRangeError
from .exactnn import ExactNnIndex, ladder_eps
from .exhaustive import ExhaustiveIndex, QueryReport
from .ladder import AnnLadder
from .metric import PointSet, all_nn_distances, pairwise_distances
from .oracle import bichromatic_nn_distances
from .stablehash import DEFAULT_C, HashSpec

_BLOCK = 512


def bucket_index(d: float, base: float) -> int:
    """The ``i`` with ``base^(i-1) <= d < base^i``, for ``d > 0``."""
    i = math.floor(math.log(d) / math.log(base)) + 1
    while base ** (i - 1) > d:
        i -= 1
    while base**i <= d:
        i += 1
    return i


def _first_power_above(x: float, base: float, strict: bool) -> int:
    """Smallest ``i`` with ``base^i > x`` (strict) or ``base^i >= x``."""
    i = math.floor(math.log(x) / math.log(base))
    ok = (lambda j: base**j > x) if strict else (lambda j: base**j >= x)
    while ok(i - 1):
        i -= 1
    while not ok(i):
        i += 1
    return i


def _zigzag(i: int) -> int:
    return 2 * i if i >= 0 else -2 * i - 1


@dataclass(frozen=True)
class Bucket:
    i: int
    members: NDArray[np.intp]  # global ids
    index: ExhaustiveIndex


@dataclass(frozen=True)
class ReverseArray:
    owner: int
    ids: NDArray[np.intp]
    nn_dist: NDArray[np.float64]  # ascending


@dataclass(frozen=True)
class RnnReport:
    y: int | None
    dist_qy: float
    window: tuple[int, int] | None  # inclusive bucket range, None when empty
    window_size: int
    buckets_probed: int
    tail: int  # entries taken from the reverse array of y
    candidates: int  # before the final filter
    exhaustive: QueryReport


class RnnIndex:
    """Reverse-nearest-neighbor index over ``points`` (B in bichromatic mode).

    ``competitors`` is the set each point's nearest-neighbor distance is taken
    against and the set the eps-NN ladder is built on: the points themselves
    in monochromatic mode, Y in bichromatic mode.
    """

    def __init__(self, points: PointSet | NDArray[np.float64], eps: float, spec: HashSpec,
                 competitors: PointSet | None = None, nn_method: str = "brute", c: float = DEFAULT_C):
        if not eps > 0:
            raise InvalidInputError(f"eps must be positive, got {eps}")
        self.mode = "mono" if competitors is None else "bichromatic"
        if self.mode == "mono":
            if not isinstance(points, PointSet):
                points = PointSet(points, spec.s)
            if points.n < 2:
                raise InvalidInputError("monochromatic RNN needs at least two points")
            competitors = points
        coords = points.coords if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64).reshape(-1, competitors.dim)
        if coords.shape[1] != competitors.dim:
            raise InvalidInputError("blue and yellow points must share the dimension")
        self.coords = coords
        self.competitors = competitors
        self.points = points if isinstance(points, PointSet) else None
        self.eps = float(eps)
        self.base = 1.0 + self.eps
        self.spec = spec
        self.s = competitors.s
        self.c = c
        n = coords.shape[0]
        self.n = n
        self.nn_dist = self._nn_distances(nn_method)

        self.ladder: AnnLadder | None
        r_max = None
        if self.mode == "bichromatic" and n:
            # b in RNN(q) forces d(q, Y) <= 2 max_b d(b, Y)
            r_max = 2.0 * float(self.nn_dist.max())
        try:
            self.ladder = AnnLadder(competitors, ladder_eps(eps), spec, r_max=r_max, stream=(6,))
        except (DegenerateLadderError, InvalidInputError):
            self.ladder = None  # every competitor coincides: any one is an exact NN

        self.zero_ids = np.flatnonzero(self.nn_dist == 0)
        self._zero_lookup: dict[bytes, list[int]] = {}
        for p in self.zero_ids.tolist():
            self._zero_lookup.setdefault(coords[p].tobytes(), []).append(p)

        self.buckets: dict[int, Bucket] = {}
        pos = np.flatnonzero(self.nn_dist > 0)
        labels = np.array([bucket_index(float(d), self.base) for d in self.nn_dist[pos]], dtype=np.int64)
        m = max(n, 2)
        for i in np.unique(labels).tolist():
            members = pos[labels == i]
            sub = PointSet(coords[members], self.s)
            index = ExhaustiveIndex(sub, self.base**i, self.eps, spec, lifted=True, m=m, c=c,
                                    stream=(4, _zigzag(i)))
            self.buckets[i] = Bucket(i, members, index)

        self._build_reverse_arrays()

    # -- preprocessing ---------------------------------------------------------

    def _nn_distances(self, method: str) -> NDArray[np.float64]:
        if self.n == 0:
            return np.empty(0)
        if self.mode == "bichromatic":
            blue = PointSet(self.coords, self.s)
            return bichromatic_nn_distances(blue, self.competitors)
        if method == "brute":
            return all_nn_distances(self.points)[0]
        if method == "exact-nn":
            ps = self.points
            nn = np.empty(ps.n)
            for p in range(ps.n):
                # query against the set without p so p is not its own answer
                keep = np.delete(np.arange(ps.n), p)
                sub = ps.subset(keep) if ps.n > 2 else None
                if sub is None:
                    nn[p] = float(ps.distances_to(ps.coords[p], keep)[0])
                    continue
                idx = ExactNnIndex(sub, self.eps, self.spec)
                nn[p] = float(sub.distances_to(ps.coords[p], [idx.query(ps.coords[p])])[0])
            return nn
        raise InvalidInputError(f"unknown nn_method {method!r}")

    def _build_reverse_arrays(self) -> None:
        """For each competitor y: points p with d(p, y) <= (1+eps) d_nn(p), sorted by d_nn."""
        Y = self.competitors.coords
        owners, members = [], []
        for lo in range(0, Y.shape[0], _BLOCK):
            hi = min(Y.shape[0], lo + _BLOCK)
            d = pairwise_distances(Y[lo:hi], self.coords, self.s) if self.n else np.empty((hi - lo, 0))
            hit = d <= self.base * self.nn_dist
            if self.mode == "mono":
                # y belongs to its own array regardless of the test
                hit[np.arange(hi - lo), np.arange(lo, hi)] = True
            yy, pp = np.nonzero(hit)
            owners.append(yy + lo)
            members.append(pp)
        owner = np.concatenate(owners) if owners else np.empty(0, np.intp)
        member = np.concatenate(members) if members else np.empty(0, np.intp)
        key = self.nn_dist[member] if member.size else np.empty(0)
        order = np.lexsort((member, key, owner))
        self._rev_ids = member[order].astype(np.intp)
        self._rev_dist = key[order]
        self._rev_ptr = np.searchsorted(owner[order], np.arange(Y.shape[0] + 1))

    def reverse_array(self, y: int) -> ReverseArray:
        lo, hi = self._rev_ptr[y], self._rev_ptr[y + 1]
        return ReverseArray(y, self._rev_ids[lo:hi], self._rev_dist[lo:hi])

    # -- queries ---------------------------------------------------------------

    def window(self, dist_qy: float) -> tuple[int, int] | None:
        """Bucket range worth probing given the distance from q to its eps-NN y."""
        if dist_qy <= 0:
            return None
        # mono: every RNN p has d_nn(p) >= d(q, y)/(1+eps); with a separate
        # competitor set only d_nn(b) >= d(q, Y)/2 >= d(q, y)/(2(1+eps)) holds
        floor_dnn = dist_qy / self.base if self.mode == "mono" else dist_qy / (2.0 * self.base)
        lo = _first_power_above(floor_dnn, self.base, strict=True)
        hi = _first_power_above(dist_qy / self.eps, self.base, strict=False)
        return (lo, hi) if lo <= hi else None

    def _eps_nn(self, q: NDArray[np.float64]) -> int | None:
        if self.ladder is None:
            return 0
        try:
            return self.ladder.query(q).point
        except NoNeighborInRangeError:
            return None

    def query_with_report(self, q: ArrayLike) -> tuple[frozenset[int], RnnReport]:
        q = self.competitors.point(q)
        empty = RnnReport(None, math.inf, None, 0, 0, 0, 0, QueryReport())
        if self.n == 0:
            return frozenset(), empty
        y = self._eps_nn(q)
        if y is None:
            # d(q, competitors) exceeds the top rung, so no point can have q as its NN
            return frozenset(), empty
        dist_qy = float(self.competitors.distances_to(q, [y])[0])

        cand: set[int] = set()
        rep = QueryReport()
        win = self.window(dist_qy)
        probed = 0
        if win is not None:
            lo, hi = win
            for i in sorted(self.buckets):
                if lo <= i <= hi:
                    b = self.buckets[i]
                    local, r = b.index.query_with_report(q)
                    cand.update(b.members[list(local)].tolist())
                    rep = rep + r
                    probed += 1

        arr = self.reverse_array(y)
        threshold = dist_qy / self.eps
        start = int(np.searchsorted(arr.nn_dist, threshold, side="left"))
        cand.update(arr.ids[start:].tolist())
        cand.update(self._zero_lookup.get(q.tobytes(), ()))

        ids = np.fromiter(sorted(cand), dtype=np.intp, count=len(cand))
        if ids.size:
            d = pairwise_distances(q[None, :], self.coords[ids], self.s)[0]
            keep = ids[d <= self.nn_dist[ids]]
        else:
            keep = ids
        size = 0 if win is None else win[1] - win[0] + 1
        report = RnnReport(y, dist_qy, win, size, probed, len(arr.ids) - start, len(cand), rep)
        return frozenset(keep.tolist()), report

    def query(self, q: ArrayLike) -> frozenset[int]:
        return self.query_with_report(q)[0]

    def window_bound(self) -> int:
        """Largest possible monochromatic window: ceil(log_{1+eps}((1+eps)/eps)) + 2."""
        return math.ceil(math.log(self.base / self.eps) / math.log(self.base)) + 2


def rnn_build(ps: PointSet, eps: float, spec: HashSpec, nn_method: str = "brute") -> RnnIndex:
    return RnnIndex(ps, eps, spec, nn_method=nn_method)


def rnn_query(idx: RnnIndex, q: ArrayLike) -> frozenset[int]:
    return idx.query(q)


def rnn_build_bichromatic(blue: PointSet | NDArray[np.float64], yellow: PointSet, eps: float,
                          spec: HashSpec) -> RnnIndex:
    return RnnIndex(blue, eps, spec, competitors=yellow)


def rnn_query_bichromatic(idx: RnnIndex, q: ArrayLike) -> frozenset[int]:
    return idx.query(q)
