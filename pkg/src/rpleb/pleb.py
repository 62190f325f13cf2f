"""(r, eps)-PLEB decision index: L hash tables per repetition, 3L-collision early stop."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import InvalidInputError
from .metric import PointSet
from .stablehash import HashSpec, LshParams, derive_params
from .tables import TableStack


@dataclass(frozen=True)
class PlebAnswer:
    found: bool
    point: int | None = None
    dist: float | None = None
    collisions: int = 0  # inspected, duplicates included
    tables_probed: int = 0
    groups_probed: int = 0


class PlebIndex:
    """Answers YES (with a point within ``r(1 + eps)``) or NO for a query ``q``.

    ``ceil(omega ln n)`` independent repetitions, each of ``L`` tables; a
    repetition stops after inspecting ``3L`` colliding points.
    """

    def __init__(self, ps: PointSet, r: float, eps: float, spec: HashSpec, omega: float = 1.0,
                 stream: tuple[int, ...] = (1,), tables: TableStack | None = None):
        if not (r > 0 and math.isfinite(r)):
            raise InvalidInputError(f"radius must be positive, got {r}")
        if not eps > 0:
            raise InvalidInputError(f"eps must be positive, got {eps}")
        if not omega > 0:
            raise InvalidInputError(f"omega must be positive, got {omega}")
        self.ps = ps
        self.r = float(r)
        self.eps = float(eps)
        self.spec = spec
        self.omega = float(omega)
        self.stream = tuple(stream)
        self.params: LshParams = derive_params(max(ps.n, 2), eps, spec, lifted=False)
        self.repeat = max(1, math.ceil(omega * math.log(ps.n)))
        if tables is None:
            tables = TableStack.build(ps.coords / self.r, spec, self.params.k, self.params.L,
                                      self.repeat, self.params.w, self.stream)
        self.tables = tables

    @property
    def L(self) -> int:
        return self.params.L

    def query(self, q: ArrayLike) -> PlebAnswer:
        q = self.ps.point(q)
        x = q / self.r
        limit = 3 * self.L
        reach = self.r * (1.0 + self.eps)
        inspected = probed = 0
        for g in range(self.repeat):
            ids, counts = self.tables.collisions(x, self.tables.group_rows(g))
            head = ids[:limit].astype(np.intp)
            if head.size:
                uniq, inverse = np.unique(head, return_inverse=True)
                dist = self.ps.distances_to(q, uniq)
                hit = np.flatnonzero(dist[inverse] <= reach)
                if hit.size:
                    pos = int(hit[0])
                    tables_seen = int(np.searchsorted(np.cumsum(counts), pos, side="right")) + 1
                    return PlebAnswer(True, int(head[pos]), float(dist[inverse[pos]]),
                                      inspected + pos + 1, probed + tables_seen, g + 1)
            inspected += head.size
            if ids.size > limit:
                probed += int(np.searchsorted(np.cumsum(counts), limit, side="left")) + 1
            else:
                probed += self.L
        return PlebAnswer(False, None, None, inspected, probed, self.repeat)


def pleb_build(ps: PointSet, r: float, eps: float, spec: HashSpec, omega: float = 1.0) -> PlebIndex:
    return PlebIndex(ps, r, eps, spec, omega)


def pleb_query(idx: PlebIndex, q: ArrayLike) -> PlebAnswer:
    return idx.query(q)
