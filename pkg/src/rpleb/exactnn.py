"""Exact nearest neighbor: an eps-NN ladder query, one exhaustive r-PLEB query, then a scan."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import NoNeighborInRangeError
from .exhaustive import ExhaustiveIndex, QueryReport
from .ladder import AnnLadder
from .metric import PointSet
from .stablehash import HashSpec


def ladder_eps(eps: float) -> float:
    """Ladder precision whose squared ratio equals ``1 + eps``."""
    return math.sqrt(1.0 + eps) - 1.0


@dataclass(frozen=True)
class ExactNnReport:
    r_hat: float
    rung: int
    candidates: int  # |S|
    fallback: bool  # S was empty and the ladder witness was returned
    exhaustive: QueryReport
    condition_number: int | None = None  # |NN_{eps(2+eps)}(P, q)|


class ExactNnIndex:
    """One exhaustive index per ladder radius, built when a query first lands on it."""

    def __init__(self, ps: PointSet, eps: float, spec: HashSpec, lifted: bool = True, lazy: bool = True):
        self.ps = ps
        self.eps = float(eps)
        self.spec = spec
        self.lifted = lifted
        self.ladder = AnnLadder(ps, ladder_eps(eps), spec, stream=(5,), lazy=lazy)
        self._rungs: dict[int, ExhaustiveIndex] = {}
        if not lazy:
            for j in range(self.ladder.n_rungs):
                self.exhaustive(j)

    def exhaustive(self, j: int) -> ExhaustiveIndex:
        idx = self._rungs.get(j)
        if idx is None:
            idx = ExhaustiveIndex(self.ps, float(self.ladder.radii[j]), self.eps, self.spec,
                                  lifted=self.lifted, m=self.ps.n, stream=(3, j))
            self._rungs[j] = idx
        return idx

    @property
    def n_indexes(self) -> int:
        return self.ladder.n_rungs

    def query_with_report(self, q: ArrayLike, condition_number: bool = False) -> tuple[int, ExactNnReport]:
        q = self.ps.point(q)
        cond = None
        if condition_number:
            d = self.ps.distances_to(q)
            cond = int(np.count_nonzero(d <= (1.0 + self.eps * (2.0 + self.eps)) * d.min()))
        try:
            ann = self.ladder.query(q)
        except NoNeighborInRangeError:
            # any point is an admissible answer once the ladder gives up
            return 0, ExactNnReport(math.inf, -1, 0, True, QueryReport(), cond)
        S, rep = self.exhaustive(ann.rung).query_with_report(q)
        if not S:
            return ann.point, ExactNnReport(ann.r_hat, ann.rung, 0, True, rep, cond)
        ids = np.fromiter(sorted(S), dtype=np.intp, count=len(S))
        dist = self.ps.distances_to(q, ids)
        best = int(ids[np.argmin(dist)])  # ids ascending, so ties go to the lowest id
        return best, ExactNnReport(ann.r_hat, ann.rung, len(S), False, rep, cond)

    def query(self, q: ArrayLike) -> int:
        return self.query_with_report(q)[0]


def exactnn_build(ps: PointSet, eps: float, spec: HashSpec, lifted: bool = True) -> ExactNnIndex:
    return ExactNnIndex(ps, eps, spec, lifted)


def exactnn_query(idx: ExactNnIndex, q: ArrayLike) -> int:
    return idx.query(q)
