"""Dense matrices, observed (masked) matrices, error metrics and test data.

Matrices are plain ``numpy`` float arrays. Positions are 0-based in memory;
the file formats in :mod:`orderextend.io` translate to 1-based coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

# Singular values below this fraction of the largest count as zero.
RANK_TOL = 1e-12


def frobenius_norm(M: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(M, dtype=float))))


def rel_error(T: np.ndarray, That: np.ndarray) -> float:
    """Relative reconstruction error ``||T - That||_F / ||T||_F``.

    Every entry counts, observed or not.
    """
    T = np.asarray(T, dtype=float)
    That = np.asarray(That, dtype=float)
    if T.shape != That.shape:
        raise ValueError(f"shape mismatch: {T.shape} vs {That.shape}")
    denom = frobenius_norm(T)
    if denom == 0.0:
        raise ValueError("reference matrix has zero Frobenius norm")
    return frobenius_norm(T - That) / denom


def critical_mask_size(n1: int, n2: int, r: int) -> int:
    """Degrees of freedom of an ``n1 x n2`` rank-``r`` matrix, ``r(n1+n2-r)``."""
    if not 0 <= r <= min(n1, n2):
        raise ValueError(f"rank {r} out of range for a {n1}x{n2} matrix")
    return r * (n1 + n2 - r)


def truncate_to_rank(M: np.ndarray, r: int) -> np.ndarray:
    """Best rank-``r`` approximation of ``M`` in Frobenius norm (truncated SVD)."""
    M = np.asarray(M, dtype=float)
    if not 1 <= r <= min(M.shape):
        raise ValueError(f"rank {r} out of range for shape {M.shape}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (U[:, :r] * s[:r]) @ Vt[:r]


def numerical_rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def generate_low_rank(n1: int, n2: int, r: int, noise_scale: float = 0.0,
                      seed: int = 0) -> np.ndarray:
    """Random ``X @ Y`` with standard normal factors plus optional noise.

    The noise is i.i.d. Gaussian with standard deviation
    ``noise_scale * ||XY||_F / sqrt(n1 * n2)``, i.e. ``noise_scale`` is a
    per-entry magnitude relative to the typical entry of ``XY``.
    """
    if not 1 <= r <= min(n1, n2):
        raise ValueError(f"rank {r} out of range for a {n1}x{n2} matrix")
    if noise_scale < 0:
        raise ValueError("noise_scale must be nonnegative")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n1, r))
    Y = rng.standard_normal((r, n2))
    T = X @ Y
    if noise_scale > 0:
        sd = noise_scale * frobenius_norm(T) / np.sqrt(n1 * n2)
        T = T + rng.normal(0.0, sd, size=T.shape)
    return T


def sample_random_mask(n1: int, n2: int, m: int, seed: int = 0) -> np.ndarray:
    """Boolean mask with exactly ``m`` positions chosen uniformly at random."""
    if not 0 <= m <= n1 * n2:
        raise ValueError(f"cannot pick {m} positions out of {n1 * n2}")
    rng = np.random.default_rng(seed)
    flat = np.zeros(n1 * n2, dtype=bool)
    flat[rng.choice(n1 * n2, size=m, replace=False)] = True
    return flat.reshape(n1, n2)


@dataclass(frozen=True)
class ObservedMatrix:
    """A partially observed matrix: the mask and the values on it.

    ``values`` is a dense array; entries off the mask are held at 0 and carry
    no meaning.
    """

    mask: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        values = np.array(self.values, dtype=float)
        if mask.ndim != 2 or mask.shape != values.shape:
            raise ValueError("mask and values must be 2-D arrays of equal shape")
        if min(mask.shape) < 1:
            raise ValueError("matrix dimensions must be positive")
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("observed values must be finite")
        values[~mask] = 0.0
        mask.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_truth(cls, truth: np.ndarray, mask: np.ndarray) -> "ObservedMatrix":
        truth = np.asarray(truth, dtype=float)
        return cls(mask, np.where(mask, truth, 0.0))

    @classmethod
    def from_entries(cls, shape: tuple[int, int],
                     entries: Iterable[tuple[int, int, float]]) -> "ObservedMatrix":
        """Build from ``(i, j, value)`` triples (0-based); duplicates rejected."""
        mask = np.zeros(shape, dtype=bool)
        values = np.zeros(shape)
        for i, j, v in entries:
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise ValueError(f"position ({i}, {j}) outside {shape}")
            if mask[i, j]:
                raise ValueError(f"duplicate position ({i}, {j})")
            mask[i, j] = True
            values[i, j] = v
        return cls(mask, values)

    @classmethod
    def empty(cls, n1: int, n2: int) -> "ObservedMatrix":
        return cls(np.zeros((n1, n2), dtype=bool), np.zeros((n1, n2)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    def entries(self) -> Iterator[tuple[int, int, float]]:
        """Observed ``(i, j, value)`` triples in row-major order."""
        for i, j in zip(*np.nonzero(self.mask)):
            yield int(i), int(j), float(self.values[i, j])

    def extended(self, entries: Iterable[tuple[int, int, float]]) -> "ObservedMatrix":
        mask = self.mask.copy()
        values = self.values.copy()
        for i, j, v in entries:
            if mask[i, j]:
                raise ValueError(f"position ({i}, {j}) is already observed")
            mask[i, j] = True
            values[i, j] = v
        return ObservedMatrix(mask, values)
