"""Locality-sensitive hashing indexes for point location, exact nearest neighbor and reverse nearest neighbor queries."""

from __future__ import annotations

from .errors import DegenerateLadderError, InvalidInputError, NoNeighborError, NoNeighborInRangeError
from .exactnn import ExactNnIndex, exactnn_build, exactnn_query
from .exhaustive import ExhaustiveIndex, QueryReport, expleb_build, expleb_query
from .ladder import AnnLadder, ann_point_query, ann_query, ladder_build
from .metric import PointSet, ls_distance
from .pleb import PlebIndex, pleb_build, pleb_query
from .rnn import RnnIndex, rnn_build, rnn_build_bichromatic, rnn_query, rnn_query_bichromatic
from .stablehash import HashSpec, LshParams, derive_params, phi

__all__ = [
    "AnnLadder", "DegenerateLadderError", "ExactNnIndex", "ExhaustiveIndex", "HashSpec", "InvalidInputError",
    "LshParams", "NoNeighborError", "NoNeighborInRangeError", "PlebIndex", "PointSet", "QueryReport",
    "RnnIndex", "ann_point_query", "ann_query", "derive_params", "exactnn_build", "exactnn_query",
    "expleb_build", "expleb_query", "ladder_build", "ls_distance", "phi", "pleb_build", "pleb_query",
    "rnn_build", "rnn_build_bichromatic", "rnn_query", "rnn_query_bichromatic",
]
