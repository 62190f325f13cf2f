"""Point files and index snapshots.

Point files come in two encodings. Text files are plain CSV, one point per
row, with ``#`` comment lines ignored. Binary files start with a fixed
header (magic, version, n, d, s) followed by ``n*d`` little-endian float64
values.

Snapshots are ``.npz`` archives holding a JSON metadata record plus
little-endian arrays. Single-radius indexes (``pleb``, ``expleb``) store
their hash tables. Composite indexes (``exactnn``, ``rnn``, ``rnn-bi``)
store their input points and settings and are rebuilt on load; every hash
function is drawn from a seeded stream, so the rebuilt index answers
exactly as the saved one did.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import InvalidInputError
from .exactnn import ExactNnIndex
from .exhaustive import ExhaustiveIndex
from .metric import PointSet
from .pleb import PlebIndex
from .rnn import RnnIndex
from .stablehash import HashSpec
from .tables import TableStack

PathLike = Union[str, Path]

POINT_MAGIC = b"RPLEBPTS"
POINT_VERSION = 1
_POINT_HEADER = struct.Struct("<8sBxxxQQd")  # magic, version, pad, n, d, s

SNAPSHOT_VERSION = 1
KINDS = ("pleb", "expleb", "exactnn", "rnn", "rnn-bi")

Index = Union[PlebIndex, ExhaustiveIndex, ExactNnIndex, RnnIndex]


class PointFileError(InvalidInputError):
    """Malformed point file; the message names the offending row when known."""


@dataclass(frozen=True)
class PointFile:
    coords: np.ndarray
    s: float | None = None  # only binary files record it
    encoding: str = "text-csv"

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


def _read_csv(path: Path) -> PointFile:
    rows: list[list[float]] = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise PointFileError(f"{path}: row {lineno}: {exc}") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise PointFileError(f"{path}: row {lineno}: expected {width} values, got {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise PointFileError(f"{path}: row {lineno}: non-finite coordinate")
            rows.append(vals)
    coords = np.array(rows, dtype=np.float64) if rows else np.empty((0, 0))
    return PointFile(coords, None, "text-csv")


def _read_binary(path: Path) -> PointFile:
    raw = path.read_bytes()
    if len(raw) < _POINT_HEADER.size:
        raise PointFileError(f"{path}: truncated header")
    magic, version, n, d, s = _POINT_HEADER.unpack_from(raw)
    if magic != POINT_MAGIC:
        raise PointFileError(f"{path}: bad magic")
    if version != POINT_VERSION:
        raise PointFileError(f"{path}: unsupported point file version {version}")
    body = raw[_POINT_HEADER.size:]
    if len(body) != 8 * n * d:
        raise PointFileError(f"{path}: header says {n}x{d} values but the body holds {len(body) // 8}")
    coords = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(n, d)
    bad = np.flatnonzero(~np.isfinite(coords).all(axis=1))
    if bad.size:
        raise PointFileError(f"{path}: row {int(bad[0]) + 1}: non-finite coordinate")
    return PointFile(coords, float(s), "little-endian-f64")


def read_points(path: PathLike) -> PointFile:
    """Read a point file, detecting the encoding from its first bytes."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(len(POINT_MAGIC))
    return _read_binary(path) if head == POINT_MAGIC else _read_csv(path)


def write_points(path: PathLike, coords: np.ndarray, s: float = 2.0, binary: bool = True) -> None:
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2:
        raise InvalidInputError("coords must be a 2-d array")
    path = Path(path)
    if binary:
        header = _POINT_HEADER.pack(POINT_MAGIC, POINT_VERSION, coords.shape[0], coords.shape[1], float(s))
        path.write_bytes(header + coords.astype("<f8").tobytes())
    else:
        np.savetxt(path, coords, delimiter=",", fmt="%.17g")


# -- snapshots ------------------------------------------------------------------

def _spec_meta(spec: HashSpec) -> dict[str, Any]:
    return {"s": spec.s, "w": spec.w, "seed": str(spec.seed)}


def _spec_from(meta: dict[str, Any]) -> HashSpec:
    return HashSpec(s=meta["s"], w=meta["w"], seed=int(meta["seed"]))


def _le(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a).astype(a.dtype.newbyteorder("<"), copy=False)


def kind_of(index: Index) -> str:
    if isinstance(index, PlebIndex):
        return "pleb"
    if isinstance(index, ExhaustiveIndex):
        return "expleb"
    if isinstance(index, ExactNnIndex):
        return "exactnn"
    if isinstance(index, RnnIndex):
        return "rnn" if index.mode == "mono" else "rnn-bi"
    raise InvalidInputError(f"cannot snapshot {type(index).__name__}")


def save_index(path: PathLike, index: Index) -> None:
    kind = kind_of(index)
    spec = index.spec
    meta: dict[str, Any] = {"version": SNAPSHOT_VERSION, "kind": kind, "spec": _spec_meta(spec),
                            "eps": index.eps}
    arrays: dict[str, np.ndarray] = {}
    if kind in ("pleb", "expleb"):
        arrays["points"] = index.ps.coords
        meta["r"] = index.r
        meta["stream"] = list(index.stream)
        meta["params"] = {k: v for k, v in vars(index.params).items()}
        if kind == "pleb":
            meta["omega"] = index.omega
        else:
            meta.update(lifted=index.lifted, m=index.m, c=index.c)
        for name, arr in index.tables.state().items():
            arrays[f"tables_{name}"] = arr
    elif kind == "exactnn":
        arrays["points"] = index.ps.coords
        meta["lifted"] = index.lifted
    elif kind == "rnn":
        arrays["points"] = index.coords
        meta["c"] = index.c
    else:
        arrays["points"] = index.coords
        arrays["yellow"] = index.competitors.coords
        meta["c"] = index.c
    payload = {k: _le(v) for k, v in arrays.items()}
    payload["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    with Path(path).open("wb") as fh:
        np.savez(fh, **payload)


def load_meta(path: PathLike) -> dict[str, Any]:
    with np.load(Path(path), allow_pickle=False) as z:
        return json.loads(z["meta"].tobytes().decode())


def load_index(path: PathLike) -> Index:
    path = Path(path)
    try:
        z = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"{path}: not an index snapshot ({exc})") from None
    with z:
        meta = json.loads(z["meta"].tobytes().decode())
        if meta.get("version") != SNAPSHOT_VERSION:
            raise InvalidInputError(f"{path}: unsupported snapshot version {meta.get('version')}")
        kind = meta["kind"]
        spec = _spec_from(meta["spec"])
        eps = float(meta["eps"])
        ps = PointSet(z["points"], spec.s) if z["points"].shape[0] else None
        if kind in ("pleb", "expleb"):
            tables = TableStack.from_state({k[len("tables_"):]: z[k] for k in z.files if k.startswith("tables_")})
            stream = tuple(meta["stream"])
            if kind == "pleb":
                return PlebIndex(ps, meta["r"], eps, spec, meta["omega"], stream=stream, tables=tables)
            return ExhaustiveIndex(ps, meta["r"], eps, spec, lifted=meta["lifted"], m=meta["m"],
                                   c=meta["c"], stream=stream, tables=tables)
        if kind == "exactnn":
            return ExactNnIndex(ps, eps, spec, lifted=meta["lifted"])
        if kind == "rnn":
            return RnnIndex(ps, eps, spec, c=meta["c"])
        if kind == "rnn-bi":
            blue = z["points"]
            return RnnIndex(ps if ps is not None else blue, eps, spec,
                            competitors=PointSet(z["yellow"], spec.s), c=meta["c"])
    raise InvalidInputError(f"{path}: unknown index kind {kind!r}")
