"""Point storage and l_s distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInputError, NoNeighborError

SUPPORTED_S = (1.0, 2.0)


def as_point(coords: ArrayLike, dim: int | None = None) -> NDArray[np.float64]:
    """Coerce ``coords`` to a finite float64 vector, optionally checking its length."""
    p = np.asarray(coords, dtype=np.float64)
    if p.ndim != 1:
        raise InvalidInputError(f"a point must be one-dimensional, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise InvalidInputError(f"dimension mismatch: expected {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("point has non-finite coordinates")
    return p


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 < s <= 2.0:
        raise InvalidInputError(f"norm exponent s must lie in (0, 2], got {s}")
    return s


def ls_distance(a: ArrayLike, b: ArrayLike, s: float = 2.0) -> float:
    """Return ``(sum |a_i - b_i|^s)^(1/s)``."""
    s = _check_s(s)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    if s == 2.0:
        return float(np.sqrt(np.dot(diff, diff)))
    if s == 1.0:
        return float(diff.sum())
    return float(np.sum(diff**s) ** (1.0 / s))


def ls_distances(points: NDArray[np.float64], q: NDArray[np.float64], s: float) -> NDArray[np.float64]:
    """Distances from every row of ``points`` to ``q``."""
    diff = np.abs(points - q)
    if s == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if s == 1.0:
        return diff.sum(axis=1)
    return np.sum(diff**s, axis=1) ** (1.0 / s)


@dataclass(frozen=True, eq=False)
class PointSet:
    """An immutable set of ``n`` points in ``(R^d, l_s)`` indexed ``0..n-1``."""

    coords: NDArray[np.float64]
    s: float = 2.0

    def __post_init__(self) -> None:
        c = np.array(self.coords, dtype=np.float64, copy=True)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise InvalidInputError(f"expected an (n, d) array with n, d >= 1, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("point set has non-finite coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "s", _check_s(self.s))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, idx: int) -> NDArray[np.float64]:
        return self.coords[idx]

    def point(self, q: ArrayLike) -> NDArray[np.float64]:
        """Validate a query point against this set's dimension."""
        return as_point(q, self.dim)

    def distances_to(self, q: ArrayLike, ids: NDArray[np.intp] | None = None) -> NDArray[np.float64]:
        q = np.asarray(q, dtype=np.float64)
        pts = self.coords if ids is None else self.coords[ids]
        return ls_distances(pts, q, self.s)

    def subset(self, ids: ArrayLike) -> PointSet:
        return PointSet(self.coords[np.asarray(ids, dtype=np.intp)], self.s)


def nn_distance(ps: PointSet, idx: int) -> tuple[float, int]:
    """Distance from point ``idx`` to ``ps`` minus itself, with the lowest-id minimizer."""
    if ps.n < 2:
        raise NoNeighborError("a singleton point set has no nearest neighbor")
    if not 0 <= idx < ps.n:
        raise InvalidInputError(f"point id {idx} out of range")
    dist = ps.distances_to(ps.coords[idx])
    dist[idx] = np.inf
    j = int(np.argmin(dist))  # argmin returns the first minimizer
    return float(dist[j]), j


def all_nn_distances(ps: PointSet, block: int = 512) -> tuple[NDArray[np.float64], NDArray[np.intp]]:
    """``nn_distance`` for every point, computed blockwise by exhaustive scan."""
    if ps.n < 2:
        raise NoNeighborError("a singleton point set has no nearest neighbor")
    n = ps.n
    out_d = np.empty(n)
    out_i = np.empty(n, dtype=np.intp)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        d = pairwise_distances(ps.coords[lo:hi], ps.coords, ps.s)
        d[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
        j = np.argmin(d, axis=1)
        out_i[lo:hi] = j
        out_d[lo:hi] = d[np.arange(hi - lo), j]
    return out_d, out_i


def pairwise_distances(a: NDArray[np.float64], b: NDArray[np.float64], s: float) -> NDArray[np.float64]:
    """Exact (not Gram-trick) distance matrix between the rows of ``a`` and ``b``."""
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        out[i] = ls_distances(b, a[i], s)
    return out
