"""Flat, numpy-backed storage for a stack of LSH hash tables.

Every table holds each point exactly once, so ``T`` tables over ``n`` points
are two ``(T, n)`` arrays: key fingerprints sorted within each row, and the
point ids in the same order. A bucket lookup is a per-row binary search,
done for all tables at once.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from .stablehash import HashSpec, fingerprint, key_multipliers, sample_directions, sample_offsets

# Upper bound on the number of float64 projections materialised at once while building.
_BUILD_CHUNK = 1 << 22


def _id_dtype(n: int) -> np.dtype:
    return np.dtype(np.int16) if n <= np.iinfo(np.int16).max else np.dtype(np.int32)


class TableStack:
    """``groups * L`` hash tables of ``k``-dimensional keys over one point cloud.

    Group ``i`` draws its hash vectors from the stream ``(*stream, i)`` of
    ``spec.seed``; tables of one group are contiguous rows.
    """

    def __init__(self, directions: NDArray[np.float64], offsets: NDArray[np.float64], w: float,
                 multipliers: NDArray[np.uint64], fps: NDArray[np.uint64], ids: NDArray[np.integer],
                 groups: int):
        self.directions = directions  # (T, k, D)
        self.offsets = offsets  # (T, k)
        self.w = float(w)
        self.multipliers = multipliers
        self.fps = fps  # (T, n) sorted per row
        self.ids = ids  # (T, n)
        self.groups = groups
        self._proj = directions.reshape(-1, directions.shape[-1])
        self._off = offsets.reshape(-1)

    @classmethod
    def build(cls, X: NDArray[np.float64], spec: HashSpec, k: int, L: int, groups: int, w: float,
              stream: tuple[int, ...] = ()) -> TableStack:
        """Hash the (already lifted and rescaled) rows of ``X`` into ``groups * L`` tables."""
        n, dim = X.shape
        directions = np.concatenate(
            [sample_directions(spec, L, k, dim, g, stream) for g in range(groups)])
        offsets = np.concatenate([sample_offsets(spec, L, k, w, g, stream) for g in range(groups)])
        mult = key_multipliers(spec.seed, k)
        T = groups * L
        fps = np.empty((T, n), dtype=np.uint64)
        ids = np.empty((T, n), dtype=_id_dtype(n))
        step = max(1, _BUILD_CHUNK // max(1, n * k))
        for lo in range(0, T, step):
            hi = min(T, lo + step)
            proj = X @ directions[lo:hi].reshape(-1, dim).T  # (n, (hi-lo)*k)
            keys = np.floor((proj + offsets[lo:hi].reshape(-1)) / w).astype(np.int64)
            fp = fingerprint(keys.reshape(n, hi - lo, k), mult).T  # (hi-lo, n)
            order = np.argsort(fp, axis=1, kind="stable")
            fps[lo:hi] = np.take_along_axis(fp, order, axis=1)
            ids[lo:hi] = order
        return cls(directions, offsets, w, mult, fps, ids, groups)

    @property
    def n_tables(self) -> int:
        return self.fps.shape[0]

    @property
    def n_points(self) -> int:
        return self.fps.shape[1]

    @property
    def k(self) -> int:
        return self.directions.shape[1]

    @property
    def tables_per_group(self) -> int:
        return self.n_tables // self.groups

    @property
    def nbytes(self) -> int:
        return self.fps.nbytes + self.ids.nbytes + self.directions.nbytes + self.offsets.nbytes

    def query_fingerprints(self, x: NDArray[np.float64], rows: slice = slice(None)) -> NDArray[np.uint64]:
        """Fingerprints of the (lifted, rescaled) query ``x`` in tables ``rows``."""
        directions = self.directions[rows]
        t = directions.shape[0]
        proj = directions.reshape(-1, directions.shape[-1]) @ x
        keys = np.floor((proj + self.offsets[rows].reshape(-1)) / self.w).astype(np.int64)
        return fingerprint(keys.reshape(t, self.k), self.multipliers)

    def spans(self, x: NDArray[np.float64], rows: slice = slice(None)) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Start/stop positions of the query's bucket in each table of ``rows``."""
        target = self.query_fingerprints(x, rows)
        fps = self.fps[rows]
        return _row_search(fps, target, "left"), _row_search(fps, target, "right")

    def collisions(self, x: NDArray[np.float64], rows: slice = slice(None)) -> tuple[NDArray[np.integer], NDArray[np.int64]]:
        """Colliding ids in table order (duplicates kept) and the per-table counts."""
        start, stop = self.spans(x, rows)
        counts = stop - start
        total = int(counts.sum())
        ids = self.ids[rows]
        if total == 0:
            return ids.reshape(-1)[:0], counts
        n = ids.shape[1]
        base = np.arange(ids.shape[0], dtype=np.int64) * n + start
        nz = counts > 0
        base, c = base[nz], counts[nz]
        offs = np.repeat(np.cumsum(c) - c, c)
        flat = np.repeat(base, c) + (np.arange(total) - offs)
        return ids.reshape(-1)[flat], counts

    def group_rows(self, g: int) -> slice:
        L = self.tables_per_group
        return slice(g * L, (g + 1) * L)

    def state(self) -> dict[str, np.ndarray]:
        return {
            "directions": self.directions, "offsets": self.offsets, "multipliers": self.multipliers,
            "fps": self.fps, "ids": self.ids,
            "meta": np.array([self.w, self.groups], dtype=np.float64),
        }

    @classmethod
    def from_state(cls, st: dict[str, np.ndarray]) -> TableStack:
        w, groups = st["meta"]
        return cls(st["directions"], st["offsets"], float(w), st["multipliers"], st["fps"], st["ids"], int(groups))


def _row_search(fps: NDArray[np.uint64], target: NDArray[np.uint64], side: str) -> NDArray[np.int64]:
    """``np.searchsorted`` applied row by row, vectorised over rows."""
    T, n = fps.shape
    lo = np.zeros(T, dtype=np.int64)
    hi = np.full(T, n, dtype=np.int64)
    flat = fps.reshape(-1)
    base = np.arange(T, dtype=np.int64) * n
    for _ in range(max(1, math.ceil(math.log2(n + 1)))):
        mid = (lo + hi) >> 1
        v = flat[base + np.minimum(mid, n - 1)]
        right = (v < target) if side == "left" else (v <= target)
        right &= lo < hi
        lo = np.where(right, mid + 1, lo)
        hi = np.where(right, hi, mid)
    return lo
