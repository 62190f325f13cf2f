"""Exhaustive r-PLEB: report every data point within distance r of the query.

With ``lifted=True`` the points gain a zero coordinate and the query a
coordinate ``r / ((1+eps)^s - 1)^(1/s)``. That keeps every data point at
least ``r'/(1+eps)`` from the query in the lifted space while preserving the
order of distances, which caps how often very close points can collide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import InvalidInputError
from .metric import PointSet
from .stablehash import DEFAULT_C, HashSpec, LshParams, derive_params, group_count
from .tables import TableStack


@dataclass(frozen=True)
class QueryReport:
    collisions: int = 0
    collisions_inside: int = 0  # with points inside B(q, r(1+eps)), duplicates included
    collisions_outside: int = 0
    tables_probed: int = 0
    hash_evaluations: int = 0
    distance_evaluations: int = 0

    def __add__(self, other: QueryReport) -> QueryReport:
        return QueryReport(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple[int, ...]:
        return (self.collisions, self.collisions_inside, self.collisions_outside,
                self.tables_probed, self.hash_evaluations, self.distance_evaluations)


class ExhaustiveIndex:
    """``ceil(c ln m)`` groups of ``L`` tables over (optionally lifted) points."""

    def __init__(self, ps: PointSet, r: float, eps: float, spec: HashSpec, lifted: bool = True,
                 m: int | None = None, c: float = DEFAULT_C, stream: tuple[int, ...] = (2,),
                 tables: TableStack | None = None):
        if not (r > 0 and math.isfinite(r)):
            raise InvalidInputError(f"radius must be positive, got {r}")
        if not eps > 0:
            raise InvalidInputError(f"eps must be positive, got {eps}")
        m = ps.n if m is None else int(m)
        if m < ps.n:
            raise InvalidInputError(f"m must be at least n={ps.n}, got {m}")
        if not c > 1.0 / math.log(2.5):
            raise InvalidInputError(f"c must exceed 1/ln(5/2), got {c}")
        self.ps = ps
        self.r = float(r)
        self.eps = float(eps)
        self.spec = spec
        self.lifted = bool(lifted)
        self.m = m
        self.c = float(c)
        self.stream = tuple(stream)
        self.params: LshParams = derive_params(max(ps.n, 2), eps, spec, lifted=self.lifted)
        self.r_prime = self.r * self.params.r_prime_over_r
        self.lift_coord = self.r * self.params.lift_coord_over_r
        self.scale = 1.0 / self.r_prime
        self.n_groups = group_count(max(m, 2), c)
        if tables is None:
            tables = TableStack.build(self._embed_data(), spec, self.params.k, self.params.L,
                                      self.n_groups, self.params.w, self.stream)
        self.tables = tables

    def _embed_data(self) -> np.ndarray:
        X = self.ps.coords
        if self.lifted:
            X = np.hstack([X, np.zeros((X.shape[0], 1))])
        return X * self.scale

    def embed_query(self, q: np.ndarray) -> np.ndarray:
        if self.lifted:
            q = np.append(q, self.lift_coord)
        return q * self.scale

    @property
    def L(self) -> int:
        return self.params.L

    def query_with_report(self, q: ArrayLike) -> tuple[frozenset[int], QueryReport]:
        q = self.ps.point(q)
        ids, _ = self.tables.collisions(self.embed_query(q))
        T = self.tables.n_tables
        if ids.size == 0:
            return frozenset(), QueryReport(0, 0, 0, T, T * self.params.k, 0)
        # each colliding point is distance-checked once, however many tables it shows up in
        uniq, mult = np.unique(ids.astype(np.intp), return_counts=True)
        dist = self.ps.distances_to(q, uniq)
        inside = int(mult[dist <= self.r * (1.0 + self.eps)].sum())
        out = frozenset(uniq[dist <= self.r].tolist())
        rep = QueryReport(int(ids.size), inside, int(ids.size) - inside, T, T * self.params.k, int(uniq.size))
        return out, rep

    def query(self, q: ArrayLike) -> frozenset[int]:
        return self.query_with_report(q)[0]


def expleb_build(ps: PointSet, r: float, eps: float, spec: HashSpec, lifted: bool = True,
                 m: int | None = None, c: float = DEFAULT_C) -> ExhaustiveIndex:
    return ExhaustiveIndex(ps, r, eps, spec, lifted, m, c)


def expleb_query(idx: ExhaustiveIndex, q: ArrayLike) -> tuple[frozenset[int], QueryReport]:
    return idx.query_with_report(q)
