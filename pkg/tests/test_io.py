from __future__ import annotations

import numpy as np
import pytest

from rpleb import ExactNnIndex, ExhaustiveIndex, InvalidInputError, PlebIndex, PointSet, RnnIndex
from rpleb.io import PointFileError, load_index, load_meta, read_points, save_index, write_points


class TestPointFiles:
    def test_binary_round_trip(self, tmp_path, rng):
        X = rng.random((7, 3))
        write_points(tmp_path / "p.bin", X, s=1.0)
        pf = read_points(tmp_path / "p.bin")
        assert np.array_equal(pf.coords, X) and pf.s == 1.0 and pf.encoding == "little-endian-f64"

    def test_csv_round_trip(self, tmp_path, rng):
        X = rng.random((5, 2))
        write_points(tmp_path / "p.csv", X, binary=False)
        pf = read_points(tmp_path / "p.csv")
        assert np.array_equal(pf.coords, X) and pf.s is None

    def test_csv_comments_and_blank_lines(self, tmp_path):
        (tmp_path / "p.csv").write_text("# header\n1,2\n\n3,4\n")
        assert read_points(tmp_path / "p.csv").coords.tolist() == [[1, 2], [3, 4]]

    def test_csv_errors_name_the_row(self, tmp_path):
        (tmp_path / "a.csv").write_text("1,2\n3\n")
        with pytest.raises(PointFileError, match="row 2"):
            read_points(tmp_path / "a.csv")
        (tmp_path / "b.csv").write_text("1,2\nx,4\n")
        with pytest.raises(PointFileError, match="row 2"):
            read_points(tmp_path / "b.csv")
        (tmp_path / "c.csv").write_text("1,nan\n")
        with pytest.raises(PointFileError, match="row 1"):
            read_points(tmp_path / "c.csv")

    def test_truncated_binary(self, tmp_path, rng):
        write_points(tmp_path / "p.bin", rng.random((4, 2)))
        raw = (tmp_path / "p.bin").read_bytes()
        (tmp_path / "p.bin").write_bytes(raw[:-8])
        with pytest.raises(PointFileError):
            read_points(tmp_path / "p.bin")

    def test_empty_csv(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        assert read_points(tmp_path / "e.csv").n == 0


def _builders(rng, spec):
    ps = PointSet(rng.random((120, 3)))
    yellow = PointSet(rng.random((60, 3)))
    return {
        "pleb": lambda: PlebIndex(ps, 0.2, 0.5, spec),
        "expleb": lambda: ExhaustiveIndex(ps, 0.3, 0.5, spec),
        "exactnn": lambda: ExactNnIndex(ps, 0.5, spec),
        "rnn": lambda: RnnIndex(ps, 0.5, spec),
        "rnn-bi": lambda: RnnIndex(ps, 0.5, spec, competitors=yellow),
    }


class TestSnapshots:
    @pytest.mark.parametrize("kind", ["pleb", "expleb", "exactnn", "rnn", "rnn-bi"])
    def test_round_trip(self, tmp_path, rng, spec2, kind):
        idx = _builders(rng, spec2)[kind]()
        path = tmp_path / f"{kind}.npz"
        save_index(path, idx)
        again = load_index(path)
        assert load_meta(path)["kind"] == kind
        for q in rng.random((100, 3)):
            a, b = idx.query(q), again.query(q)
            assert a == b

    def test_tables_are_stored(self, tmp_path, rng, spec2):
        idx = _builders(rng, spec2)["expleb"]()
        save_index(tmp_path / "e.npz", idx)
        again = load_index(tmp_path / "e.npz")
        assert np.array_equal(idx.tables.fps, again.tables.fps)
        assert again.params == idx.params

    def test_not_a_snapshot(self, tmp_path):
        (tmp_path / "x.npz").write_text("hello")
        with pytest.raises(InvalidInputError):
            load_index(tmp_path / "x.npz")
