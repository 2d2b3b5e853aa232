"""Budgeted access to the hidden ground-truth matrix."""

from __future__ import annotations

import abc
import threading
from typing import Optional

import numpy as np

from .matrix import ObservedMatrix


class OracleError(Exception):
    pass


class BudgetExhausted(OracleError):
    pass


class RestrictedPosition(OracleError):
    pass


class DuplicateQuery(OracleError):
    pass


class QueryOracle(abc.ABC):
    """Source of true entries. Each query costs one unit of budget."""

    @abc.abstractmethod
    def query(self, i: int, j: int) -> float: ...

    @abc.abstractmethod
    def remaining_budget(self) -> int: ...

    @abc.abstractmethod
    def log(self) -> list[tuple[int, int, float]]: ...

    def can_query(self, i: int, j: int) -> bool:
        return True


class GroundTruthOracle(QueryOracle):
    """Answers queries from a known matrix.

    ``queryable`` optionally restricts which positions may be asked for.
    Queries are serialized by a lock so budget and log stay consistent.
    """

    def __init__(self, truth: np.ndarray, budget: int,
                 queryable: Optional[np.ndarray] = None):
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        self.truth = np.asarray(truth, dtype=float)
        self.initial_budget = int(budget)
        self.queryable = None if queryable is None else np.asarray(queryable, dtype=bool)
        if self.queryable is not None and self.queryable.shape != self.truth.shape:
            raise ValueError("queryable mask shape does not match truth")
        self._asked = np.zeros(self.truth.shape, dtype=bool)
        self._log: list[tuple[int, int, float]] = []
        self._lock = threading.Lock()

    def can_query(self, i: int, j: int) -> bool:
        return self.queryable is None or bool(self.queryable[i, j])

    def query(self, i: int, j: int) -> float:
        with self._lock:
            n1, n2 = self.truth.shape
            if not (0 <= i < n1 and 0 <= j < n2):
                raise IndexError(f"position ({i}, {j}) outside {self.truth.shape}")
            if len(self._log) >= self.initial_budget:
                raise BudgetExhausted("query budget exhausted")
            if not self.can_query(i, j):
                raise RestrictedPosition(f"position ({i}, {j}) may not be queried")
            if self._asked[i, j]:
                raise DuplicateQuery(f"position ({i}, {j}) was already queried")
            value = float(self.truth[i, j])
            self._asked[i, j] = True
            self._log.append((i, j, value))
            return value

    def remaining_budget(self) -> int:
        with self._lock:
            return self.initial_budget - len(self._log)

    def log(self) -> list[tuple[int, int, float]]:
        with self._lock:
            return list(self._log)


class SurrogateSampler:
    """Stand-in values for unqueried entries, drawn from nearby observations.

    ``sampler(i, j)`` draws uniformly from the observed values in row ``i``
    together with those in column ``j``; if both are empty it draws from all
    observed values, and returns 0.0 when nothing is observed at all. The
    mask and value arrays are read live, so entries revealed later are taken
    into account. Drawing never touches an oracle.
    """

    def __init__(self, mask: np.ndarray, values: np.ndarray, seed: int = 0):
        self.mask = mask
        self.values = values
        self.rng = np.random.default_rng(seed)

    def pool(self, i: int, j: int) -> np.ndarray:
        row = self.values[i, self.mask[i]]
        col = self.values[self.mask[:, j], j]
        vals = np.concatenate([row, col])
        if vals.size == 0:
            vals = self.values[self.mask]
        return vals

    def __call__(self, i: int, j: int) -> float:
        vals = self.pool(i, j)
        if vals.size == 0:
            return 0.0
        return float(vals[self.rng.integers(vals.size)])


def surrogate_sampler(obs: ObservedMatrix, seed: int = 0) -> SurrogateSampler:
    return SurrogateSampler(obs.mask, obs.values, seed)
