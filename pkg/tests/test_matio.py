"""MATF v1 and CSV matrix file round trips and error paths."""

import numpy as np
import pytest

from orthoreg.errors import MatrixFileError
from orthoreg import matio


def test_matf_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    w = rng.standard_normal((5, 3))
    path = tmp_path / "w.matf"
    matio.save_matf(path, w)
    back = matio.load_matf(path)
    assert np.array_equal(back, w)


def test_matf_layout(tmp_path):
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "w.matf"
    matio.save_matf(path, w)
    blob = path.read_bytes()
    assert blob[:8] == b"ORTHMAT1"
    assert int.from_bytes(blob[8:12], "little") == 2
    assert int.from_bytes(blob[12:16], "little") == 2
    assert np.frombuffer(blob[16:], dtype="<f8").tolist() == [1, 2, 3, 4]


def test_matf_bad_magic(tmp_path):
    path = tmp_path / "bad.matf"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 24)
    with pytest.raises(MatrixFileError, match="magic"):
        matio.load_matf(path)


def test_matf_truncated(tmp_path):
    path = tmp_path / "short.matf"
    path.write_bytes(b"ORTHMAT1" + (2).to_bytes(4, "little") * 2 + b"\0" * 8)
    with pytest.raises(MatrixFileError, match="expected"):
        matio.load_matf(path)


def test_matf_missing(tmp_path):
    with pytest.raises(MatrixFileError, match="cannot read"):
        matio.load_matf(tmp_path / "nope.matf")


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    w = rng.standard_normal((4, 6))
    path = tmp_path / "w.csv"
    matio.save_csv(path, w)
    assert np.array_equal(matio.load_csv(path), w)


def test_csv_bad_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,oops\n")
    with pytest.raises(MatrixFileError, match="row 2, column 2"):
        matio.load_csv(path)


def test_csv_ragged(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(MatrixFileError, match="row 2"):
        matio.load_csv(path)


def test_load_matrix_sniffs(tmp_path):
    w = np.array([[1.5, -2.5]])
    matio.save_matf(tmp_path / "a.matf", w)
    matio.save_csv(tmp_path / "a.csv", w)
    assert np.array_equal(matio.load_matrix(tmp_path / "a.matf"), w)
    assert np.array_equal(matio.load_matrix(tmp_path / "a.csv"), w)
