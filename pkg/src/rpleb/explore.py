"""Sweep of the hash-family parameters over a grid of eps values.

Each row reports the collision probabilities, the exponents and the
closed-form caps they are expected to respect when ``w = max(1, eps)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidInputError
from .stablehash import HashSpec, derive_params


def rho_bound(eps: float, s: float) -> float:
    """Closed-form cap on the lifted exponent rho."""
    if s == 1.0:
        return 1.0 / (1.0 + min(eps * eps, math.sqrt(eps)) / 4.0)
    return 1.0 / (1.0 + eps * eps / (1.0 + eps))


def inv_phi1_cap(s: float) -> float:
    return 4.0 if s == 1.0 else 3.0


@dataclass(frozen=True)
class SweepRow:
    eps: float
    w: float
    s: float
    lifted: bool
    p0: float
    p1: float
    p2: float
    rho: float
    alpha: float
    bound_rho: float
    bound_ok: bool  # rho <= bound_rho
    inv_phi1: float  # 1/Phi(1)
    inv_log_p2: float  # 1/ln(1/Phi(1 + eps'))
    alpha_over_eps_rho: float
    all_ok: bool  # every cap in this row holds

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> list[object]:
        return list(asdict(self).values())


def sweep_row(eps: float, s: float, w: float | None = None, lifted: bool = True) -> SweepRow:
    spec = HashSpec(s=s, w=w)
    p = derive_params(2, eps, spec, lifted=lifted)
    bound = rho_bound(eps, s)
    inv_phi1 = 1.0 / p.p1
    inv_log_p2 = 1.0 / math.log(1.0 / p.p2)
    ratio = p.alpha / (eps * p.rho)
    bound_ok = p.rho <= bound
    all_ok = bound_ok and ratio <= 1.0 and inv_phi1 <= inv_phi1_cap(s) and (s != 1.0 or inv_log_p2 <= 1.0)
    return SweepRow(eps, p.w, s, lifted, p.p0, p.p1, p.p2, p.rho, p.alpha, bound, bound_ok,
                    inv_phi1, inv_log_p2, ratio, all_ok)


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:steps``, log10-spaced, endpoints included."""
    try:
        lo, hi, steps = text.split(":")
        lo_f, hi_f, n = float(lo), float(hi), int(steps)
    except ValueError:
        raise InvalidInputError(f"grid must look like lo:hi:steps, got {text!r}") from None
    if not (0 < lo_f <= hi_f and math.isfinite(hi_f)) or n < 1 or (n == 1 and lo_f != hi_f):
        raise InvalidInputError(f"invalid grid {text!r}")
    return np.logspace(math.log10(lo_f), math.log10(hi_f), n)


def sweep(grid: np.ndarray, s: float, lifted: bool = True) -> list[SweepRow]:
    return [sweep_row(float(e), s, lifted=lifted) for e in grid]
