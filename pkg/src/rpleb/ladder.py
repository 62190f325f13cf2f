"""eps-NN queries by binary search over a geometric ladder of (r, eps)-PLEB indexes.

Rungs are ``r_min (1+eps)^j`` for ``j = 0..J``. ``r_min`` is half the
smallest nonzero nearest-neighbor distance in the set, and the top rung
reaches at least twice the largest distance from point 0, which bounds
the diameter. Rung indexes are built on first use; each rung draws its
hash functions from its own seeded stream, so the answers do not depend
on build order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateLadderError, InvalidInputError, NoNeighborInRangeError
from .metric import PointSet, all_nn_distances
from .pleb import PlebAnswer, PlebIndex
from .stablehash import HashSpec


@dataclass(frozen=True)
class AnnResult:
    point: int
    r_hat: float
    rung: int
    dist: float  # d(q, point)
    rungs_probed: int
    collisions: int


class AnnLadder:
    def __init__(self, ps: PointSet, eps: float, spec: HashSpec, r_max: float | None = None,
                 stream: tuple[int, ...] = (5,), lazy: bool = True):
        if ps.n < 2:
            raise InvalidInputError("a radius ladder needs at least two points")
        if not eps > 0:
            raise InvalidInputError(f"eps must be positive, got {eps}")
        nn, _ = all_nn_distances(ps)
        nonzero = nn[nn > 0]
        if nonzero.size == 0:
            raise DegenerateLadderError("all points coincide")
        self.ps = ps
        self.eps = float(eps)
        self.spec = spec
        self.stream = tuple(stream)
        self.r_min = float(nonzero.min()) / 2.0
        top = 2.0 * float(ps.distances_to(ps.coords[0]).max())
        self.r_max = max(top, float(r_max)) if r_max is not None else top
        J = max(1, math.ceil(math.log(self.r_max / self.r_min) / math.log1p(self.eps)))
        self.radii = self.r_min * (1.0 + self.eps) ** np.arange(J + 1)
        # per-rung failure below 1/(n J) so a union bound covers the probed rungs
        self.omega = 1.0 + math.log(J + 1) / math.log(ps.n)
        self._plebs: dict[int, PlebIndex] = {}
        if not lazy:
            self.materialize()

    @property
    def n_rungs(self) -> int:
        return len(self.radii)

    def rung(self, j: int) -> PlebIndex:
        idx = self._plebs.get(j)
        if idx is None:
            idx = PlebIndex(self.ps, float(self.radii[j]), self.eps, self.spec, self.omega,
                            stream=(*self.stream, j))
            self._plebs[j] = idx
        return idx

    def materialize(self) -> list[PlebIndex]:
        return [self.rung(j) for j in range(self.n_rungs)]

    @property
    def built_rungs(self) -> list[int]:
        return sorted(self._plebs)

    def query(self, q: ArrayLike) -> AnnResult:
        q = self.ps.point(q)
        probes = collisions = 0

        def ask(j: int) -> PlebAnswer:
            nonlocal probes, collisions
            probes += 1
            ans = self.rung(j).query(q)
            collisions += ans.collisions
            return ans

        top = self.n_rungs - 1
        best = ask(top)
        if not best.found:
            raise NoNeighborInRangeError("the top rung of the ladder answered NO")
        lo, hi = -1, top  # rung lo answered NO (or is virtual), rung hi answered YES
        while hi - lo > 1:
            mid = (lo + hi) // 2
            ans = ask(mid)
            if ans.found:
                hi, best = mid, ans
            else:
                lo = mid
        # smallest stored radius >= d(q, witness): never below d(q, P)
        j = min(int(np.searchsorted(self.radii, best.dist, side="left")), top)
        return AnnResult(best.point, float(self.radii[j]), j, best.dist, probes, collisions)


def ladder_build(ps: PointSet, eps: float, spec: HashSpec, lazy: bool = True) -> AnnLadder:
    return AnnLadder(ps, eps, spec, lazy=lazy)


def ann_query(ladder: AnnLadder, q: ArrayLike) -> tuple[int, float]:
    res = ladder.query(q)
    return res.point, res.r_hat


def ann_point_query(ladder: AnnLadder, q: ArrayLike) -> int:
    return ladder.query(q).point
