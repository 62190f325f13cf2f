"""s-stable hash families, the collision model and the LSH parameter calculator.

A hash function is ``f(x) = floor((x . a + b) / w)`` with ``a`` drawn
coordinate-wise from a standard Cauchy (s=1) or standard normal (s=2) law
and ``b`` uniform in ``[0, w)``. Two points at distance ``l`` collide under
one random ``f`` with probability ``phi(l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidInputError

SQRT_2PI = math.sqrt(2.0 * math.pi)
# Default number of exhaustive-query groups: ceil(c ln m) with c = 3 / ln(5/2).
DEFAULT_C = 3.0 / math.log(2.5)


@dataclass(frozen=True)
class HashSpec:
    """Hash family settings.

    ``w=None`` means "use ``max(1, eps)``" for whatever ``eps`` the
    structure being built is parameterised with.
    """

    s: float = 2.0
    w: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", float(self.s))
        if self.s not in (1.0, 2.0):
            raise InvalidInputError(f"only s in {{1, 2}} is supported, got {self.s}")
        if self.w is not None:
            if not (self.w > 0 and math.isfinite(self.w)):
                raise InvalidInputError(f"window width must be positive, got {self.w}")
            object.__setattr__(self, "w", float(self.w))
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))

    def width(self, eps: float) -> float:
        return self.w if self.w is not None else max(1.0, float(eps))


def phi_value(l: float, w: float, s: float) -> float:
    """Collision probability of two points at distance ``l`` under one hash function."""
    if not l > 0:
        raise InvalidInputError(f"distance must be positive, got {l}")
    if math.isinf(l):
        return 0.0
    t = w / l
    if s == 1.0:
        return 2.0 * math.atan(t) / math.pi - math.log1p(t * t) / (math.pi * t)
    if s == 2.0:
        # 1 - 2 Ncdf(-t) == erf(t / sqrt 2); expm1 keeps small-t accuracy
        return math.erf(t / math.sqrt(2.0)) + 2.0 / (SQRT_2PI * t) * math.expm1(-0.5 * t * t)
    raise InvalidInputError(f"no closed form for s={s}")


def phi(l: float, spec: HashSpec, eps: float = 1.0) -> float:
    """``phi_value`` with the window width taken from ``spec`` (resolved against ``eps``)."""
    return phi_value(l, spec.width(eps), spec.s)


def lifted_eps(eps: float, s: float) -> float:
    """Approximation parameter seen by the structure after the one-coordinate lift."""
    t = (1.0 + eps) ** s
    return (t + 1.0 / t - 1.0) ** (1.0 / s) - 1.0


def lift_geometry(r: float, eps: float, s: float) -> tuple[float, float]:
    """Return ``(r_lifted, query_lift_coordinate)`` for radius ``r``."""
    t = (1.0 + eps) ** s - 1.0
    return r * (1.0 + 1.0 / t) ** (1.0 / s), r / t ** (1.0 / s)


@dataclass(frozen=True)
class LshParams:
    n: int
    eps: float
    s: float
    w: float
    lifted: bool
    p0: float
    p1: float
    p2: float
    k: int
    L: int
    rho: float
    alpha: float
    eps_prime: float
    r_prime_over_r: float
    lift_coord_over_r: float


def derive_params(n: int, eps: float, spec: HashSpec, lifted: bool = False) -> LshParams:
    """Compute ``p0, p1, p2``, the key length ``k``, the table count ``L`` and the exponents."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2 to derive parameters, got {n}")
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidInputError(f"eps must be positive, got {eps}")
    w = spec.width(eps)
    s = spec.s
    if lifted:
        eps_prime = lifted_eps(eps, s)
        ratio, coord = lift_geometry(1.0, eps, s)
    else:
        eps_prime, ratio, coord = eps, 1.0, 0.0
    p0 = phi_value(1.0 / (1.0 + eps), w, s)
    p1 = phi_value(1.0, w, s)
    p2 = phi_value(1.0 + eps_prime, w, s)
    if not (p0 >= p1 > p2 > 0):
        raise InvalidInputError(f"collision probabilities out of order: {p0}, {p1}, {p2}")
    rho = math.log(p1) / math.log(p2)
    alpha = rho * (1.0 - math.log(p0) / math.log(p1))
    k = max(1, math.ceil(math.log(n) / math.log(1.0 / p2)))
    L = math.ceil(n**rho / p1)
    return LshParams(
        n=n, eps=eps, s=s, w=w, lifted=lifted, p0=p0, p1=p1, p2=p2, k=k, L=L,
        rho=rho, alpha=alpha, eps_prime=eps_prime, r_prime_over_r=ratio, lift_coord_over_r=coord,
    )


def group_count(m: int, c: float = DEFAULT_C) -> int:
    """``ceil(c ln m)``, at least one."""
    return max(1, math.ceil(c * math.log(m)))


# -- sampling ---------------------------------------------------------------

def _generator(seed: int, stream: tuple[int, ...], group: int, which: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(*stream, group, which))
    return np.random.Generator(np.random.Philox(ss))


def sample_directions(spec: HashSpec, tables: int, k: int, dim: int, group: int,
                      stream: tuple[int, ...] = ()) -> NDArray[np.float64]:
    """Directions for tables ``0..tables-1`` of one group, shape ``(tables, k, dim)``.

    Table ``t`` only consumes the prefix of its group's stream, so its draws
    do not depend on how many tables follow it.
    """
    rng = _generator(spec.seed, stream, group, 0)
    if spec.s == 1.0:
        return np.tan(np.pi * (rng.random((tables, k, dim)) - 0.5))
    return rng.standard_normal((tables, k, dim))


def sample_offsets(spec: HashSpec, tables: int, k: int, w: float, group: int,
                   stream: tuple[int, ...] = ()) -> NDArray[np.float64]:
    rng = _generator(spec.seed, stream, group, 1)
    b = rng.random((tables, k)) * w
    return np.minimum(b, np.nextafter(w, 0.0))


@dataclass(frozen=True, eq=False)
class HashVector:
    """``k`` concatenated hash functions ``g = (f_1, ..., f_k)``."""

    directions: NDArray[np.float64]  # (k, dim)
    offsets: NDArray[np.float64]  # (k,)
    w: float

    @property
    def k(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


def sample_hash_vector(spec: HashSpec, k: int, dim: int, group: int, table: int,
                       eps: float = 1.0, stream: tuple[int, ...] = ()) -> HashVector:
    if k < 1 or dim < 1:
        raise InvalidInputError("k and dim must be positive")
    w = spec.width(eps)
    a = sample_directions(spec, table + 1, k, dim, group, stream)[table]
    b = sample_offsets(spec, table + 1, k, w, group, stream)[table]
    return HashVector(a, b, w)


def hash_point(g: HashVector, p: ArrayLike, scale: float = 1.0) -> NDArray[np.int64]:
    """Key ``floor((scale * p . a_i + b_i) / w)`` for each of the ``k`` functions."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (g.dim,):
        raise InvalidInputError(f"dimension mismatch: hash expects {g.dim}, got {p.shape}")
    return np.floor((g.directions @ (scale * p) + g.offsets) / g.w).astype(np.int64)


# -- key fingerprints ---------------------------------------------------------

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def key_multipliers(seed: int, k: int) -> NDArray[np.uint64]:
    """Odd 64-bit multipliers for the multilinear key hash."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(0xF1,))))
    return rng.integers(0, 2**63, size=k, dtype=np.uint64) * np.uint64(2) + np.uint64(1)


def fingerprint(keys: NDArray[np.int64], multipliers: NDArray[np.uint64]) -> NDArray[np.uint64]:
    """Hash the last axis (``k`` integers) of ``keys`` into one 64-bit value."""
    with np.errstate(over="ignore"):
        h = (keys.view(np.uint64) * multipliers).sum(axis=-1, dtype=np.uint64)
        # splitmix64 finaliser
        h ^= h >> np.uint64(30)
        h *= np.uint64(0xBF58476D1CE4E5B9)
        h ^= h >> np.uint64(27)
        h *= np.uint64(0x94D049BB133111EB)
        h ^= h >> np.uint64(31)
    return h
