import numpy as np
import pytest

from orderextend import ObservedMatrix
from orderextend.io import (FormatError, load_dense, load_observed, load_query_log,
                            save_dense, save_observed, save_query_log)


def write(tmp_path, text, name="f.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_observed_example(tmp_path):
    obs = load_observed(write(tmp_path, "3 3 2\n1 1 5.0\n2 3 -1.5\n"))
    assert obs.shape == (3, 3)
    assert list(obs.entries()) == [(0, 0, 5.0), (1, 2, -1.5)]


@pytest.mark.parametrize("text, match", [
    ("3 3 3\n1 1 5.0\n2 3 -1.5\n", r"f.txt:3: header declares 3 entries, found 2"),
    ("3 3 1\n1 1 5.0\n2 3 -1.5\n", r"f.txt:3: more entries"),
    ("3 3 2\n1 1 5.0\n2 x -1.5\n", r"f.txt:3: malformed"),
    ("3 3 2\n1 1 5.0\n4 1 -1.5\n", r"f.txt:3: position \(4, 1\) outside"),
    ("3 3 2\n1 1 5.0\n1 1 -1.5\n", r"f.txt:3: duplicate"),
    ("3 3\n", r"f.txt:1: bad header"),
    ("", r"empty"),
])
def test_load_observed_errors(tmp_path, text, match):
    with pytest.raises(FormatError, match=match):
        load_observed(write(tmp_path, text))


def test_observed_round_trip(tmp_path, rng):
    obs = ObservedMatrix.from_truth(rng.standard_normal((7, 5)), rng.random((7, 5)) < 0.4)
    p = tmp_path / "o.txt"
    save_observed(p, obs)
    back = load_observed(p)
    np.testing.assert_array_equal(back.mask, obs.mask)
    np.testing.assert_array_equal(back.values, obs.values)


def test_save_dense_identity(tmp_path):
    p = tmp_path / "m.csv"
    save_dense(p, np.eye(2))
    assert p.read_text() == "1,0\n0,1\n"


def test_dense_round_trip_is_bit_exact(tmp_path, rng):
    M = rng.standard_normal((6, 4)) * 10.0 ** rng.integers(-20, 20, size=(6, 4))
    p = tmp_path / "m.csv"
    save_dense(p, M)
    np.testing.assert_array_equal(load_dense(p), M)


def test_load_dense_errors(tmp_path):
    with pytest.raises(FormatError, match="m.csv:2: expected 2 values"):
        load_dense(write(tmp_path, "1,2\n3\n", "m.csv"))
    with pytest.raises(FormatError, match="malformed"):
        load_dense(write(tmp_path, "1,a\n", "m.csv"))
    with pytest.raises(FormatError, match="empty"):
        load_dense(write(tmp_path, "", "m.csv"))


def test_query_log_round_trip(tmp_path):
    log = [(0, 2, 1.5), (3, 1, -0.1)]
    p = tmp_path / "q.csv"
    save_query_log(p, log)
    assert p.read_text().splitlines() == [
        "i,j,value,sequence_number", "1,3,1.5,1", "4,2,-0.10000000000000001,2"]
    assert load_query_log(p) == log
