"""Text formats: sparse observations, dense CSV matrices and query logs.

Coordinates in files are 1-based. Floats are written with 17 significant
digits so that a save/load round trip is bit-exact.
"""

from __future__ import annotations

import csv
import os
from typing import Iterable

import numpy as np

from .matrix import ObservedMatrix


class FormatError(ValueError):
    pass


def _f(x: float) -> str:
    return f"{float(x):.17g}"


def _write(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def save_observed(path: str | os.PathLike, obs: ObservedMatrix) -> None:
    n1, n2 = obs.shape
    lines = [f"{n1} {n2} {obs.n_observed}"]
    lines += [f"{i + 1} {j + 1} {_f(v)}" for i, j, v in obs.entries()]
    _write(path, "\n".join(lines) + "\n")


def load_observed(path: str | os.PathLike) -> ObservedMatrix:
    """Parse ``n_rows n_cols n_entries`` followed by ``i j value`` lines."""
    with open(path) as fh:
        lines = [(k, ln.strip()) for k, ln in enumerate(fh, start=1)]
    lines = [(k, ln) for k, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty file")
    k0, head = lines[0]
    try:
        n1, n2, count = (int(x) for x in head.split())
    except ValueError:
        raise FormatError(f"{path}:{k0}: bad header {head!r}") from None
    if n1 < 1 or n2 < 1 or count < 0:
        raise FormatError(f"{path}:{k0}: bad dimensions in header {head!r}")
    mask = np.zeros((n1, n2), dtype=bool)
    values = np.zeros((n1, n2))
    body = lines[1:]
    for n, (k, ln) in enumerate(body, start=1):
        if n > count:
            raise FormatError(f"{path}:{k}: more entries than the {count} declared")
        parts = ln.split()
        try:
            if len(parts) != 3:
                raise ValueError
            i, j, v = int(parts[0]) - 1, int(parts[1]) - 1, float(parts[2])
        except ValueError:
            raise FormatError(f"{path}:{k}: malformed entry {ln!r}") from None
        if not (0 <= i < n1 and 0 <= j < n2):
            raise FormatError(f"{path}:{k}: position ({i + 1}, {j + 1}) outside {n1}x{n2}")
        if mask[i, j]:
            raise FormatError(f"{path}:{k}: duplicate position ({i + 1}, {j + 1})")
        mask[i, j] = True
        values[i, j] = v
    if len(body) < count:
        last = body[-1][0] if body else k0
        raise FormatError(f"{path}:{last}: header declares {count} entries, found {len(body)}")
    return ObservedMatrix(mask, values)


def save_dense(path: str | os.PathLike, M: np.ndarray) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _write(path, "".join(",".join(_f(x) for x in row) + "\n" for row in M))


def load_dense(path: str | os.PathLike) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for k, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise FormatError(f"{path}:{k}: malformed row") from None
            if len(rows[-1]) != len(rows[0]):
                raise FormatError(f"{path}:{k}: expected {len(rows[0])} values, "
                                  f"found {len(rows[-1])}")
    if not rows:
        raise FormatError(f"{path}: empty matrix")
    return np.array(rows)


def save_query_log(path: str | os.PathLike,
                   log: Iterable[tuple[int, int, float]]) -> None:
    """CSV ``i,j,value,sequence_number`` with 1-based positions and sequence."""
    lines = ["i,j,value,sequence_number"]
    lines += [f"{i + 1},{j + 1},{_f(v)},{n}" for n, (i, j, v) in enumerate(log, start=1)]
    _write(path, "\n".join(lines) + "\n")


def load_query_log(path: str | os.PathLike) -> list[tuple[int, int, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out = [(int(r["i"]) - 1, int(r["j"]) - 1, float(r["value"]), int(r["sequence_number"]))
               for r in reader]
    out.sort(key=lambda e: e[3])
    return [e[:3] for e in out]
