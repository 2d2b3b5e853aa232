"""Budget sweeps comparing Order&Extend with query-free and random baselines."""

from __future__ import annotations

import concurrent.futures
import math
import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .completion import (KAPPA, CompletionReport, order_and_extend,
                         sequential_complete)
from .matrix import ObservedMatrix, critical_mask_size, rel_error, sample_random_mask
from .oracle import GroundTruthOracle, QueryOracle

ORDER_EXTEND = "order_extend"
RANDOM_BASELINE = "random_baseline"
SEQUENTIAL = "sequential"
ALGORITHMS = (ORDER_EXTEND, RANDOM_BASELINE, SEQUENTIAL)
# Row carrying phi - m0, the queries needed to reach the critical mask size.
CRITICAL_LINE = "critical_line"

CSV_HEADER = "algorithm,b,queries_used,rel_error,recovered_fraction,wall_time_s,seed"


@dataclass(frozen=True)
class ExperimentConfig:
    rank: int
    budgets: Sequence[int]
    seeds: Sequence[int]
    algorithms: Sequence[str] = (ORDER_EXTEND, RANDOM_BASELINE)
    theta: float = 1.0
    initial_mask_fraction: float = 0.4

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if not 0 < self.initial_mask_fraction < 1:
            raise ValueError("initial_mask_fraction must lie in (0, 1)")
        budgets = [int(b) for b in self.budgets]
        if any(b < 0 for b in budgets):
            raise ValueError("budgets must be nonnegative")
        if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
            raise ValueError("budgets must be strictly increasing")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        object.__setattr__(self, "budgets", tuple(budgets))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))


@dataclass(frozen=True)
class ExperimentRow:
    algorithm: str
    b: int
    queries_used: int
    rel_error: float
    recovered_fraction: float
    wall_time_s: float
    seed: int

    def csv(self) -> str:
        return ",".join([self.algorithm, str(self.b), str(self.queries_used),
                         _fmt(self.rel_error), _fmt(self.recovered_fraction),
                         _fmt(self.wall_time_s), str(self.seed)])


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.17g}"


def format_rows(rows: Sequence[ExperimentRow]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"


def random_extend_baseline(obs: ObservedMatrix, truth: np.ndarray, b: int,
                           seed: int = 0) -> ObservedMatrix:
    """``obs`` plus ``b`` uniformly chosen unobserved entries read from ``truth``."""
    missing = np.flatnonzero(~obs.mask)
    if not 0 <= b <= len(missing):
        raise ValueError(f"cannot add {b} entries, only {len(missing)} are unobserved")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(missing, size=b, replace=False))
    truth = np.asarray(truth, dtype=float)
    n2 = obs.shape[1]
    return obs.extended((int(p // n2), int(p % n2), float(truth.flat[p])) for p in picks)


def condition_number_variant(obs: ObservedMatrix, r: int, kappa_threshold: float,
                             oracle: Optional[QueryOracle], budget: Optional[int] = None,
                             seed: int = 0) -> CompletionReport:
    """Order&Extend with systems judged unstable when ``kappa(A) >= kappa_threshold``."""
    return order_and_extend(obs, r, theta=kappa_threshold, oracle=oracle, budget=budget,
                            seed=seed, criterion=KAPPA)


def run_cell(truth: np.ndarray, obs: ObservedMatrix, algorithm: str, b: int,
             rank: int, theta: float, seed: int) -> tuple[CompletionReport, float]:
    """One algorithm run; returns the report and its wall time (no file I/O)."""
    start = time.perf_counter()
    if algorithm == ORDER_EXTEND:
        rep = order_and_extend(obs, rank, theta, GroundTruthOracle(truth, b), b, seed=seed)
    elif algorithm == RANDOM_BASELINE:
        b_eff = min(b, obs.mask.size - obs.n_observed)
        ext = random_extend_baseline(obs, truth, b_eff, seed)
        rep = sequential_complete(ext, rank)
        added = np.argwhere(ext.mask & ~obs.mask)
        rep.queries = [(int(i), int(j), float(truth[i, j])) for i, j in added]
    elif algorithm == SEQUENTIAL:
        rep = sequential_complete(obs, rank)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return rep, time.perf_counter() - start


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("AMC_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(truth: np.ndarray, config: ExperimentConfig,
                   timing: bool = False) -> list[ExperimentRow]:
    """Rows for every (seed, budget, algorithm) plus one critical-line row per seed.

    The initial mask for each seed has ``round(fraction * phi)`` uniformly
    random positions. Errors count every entry of ``truth``. Wall times are
    reported only with ``timing`` (NaN otherwise) so that the output is
    reproducible byte for byte. Cells run on ``AMC_THREADS`` threads.
    """
    truth = np.asarray(truth, dtype=float)
    n1, n2 = truth.shape
    phi = critical_mask_size(n1, n2, config.rank)
    m0 = int(round(config.initial_mask_fraction * phi))
    if not 0 < m0 < min(phi, n1 * n2):
        raise ValueError(f"initial mask size {m0} must lie strictly between 0 and phi={phi}")

    masks = {s: ObservedMatrix.from_truth(truth, sample_random_mask(n1, n2, m0, s))
             for s in config.seeds}
    cells = [(s, b, a) for s in config.seeds for b in config.budgets
             for a in config.algorithms]

    def work(cell):
        s, b, a = cell
        rep, dt = run_cell(truth, masks[s], a, b, config.rank, config.theta, s)
        return ExperimentRow(a, b, rep.queries_used, rel_error(truth, rep.estimate),
                             rep.recovered_fraction, dt if timing else math.nan, s)

    with concurrent.futures.ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(work, cells))
    rows += [ExperimentRow(CRITICAL_LINE, phi - m0, phi - m0, math.nan, math.nan,
                           math.nan, s) for s in config.seeds]
    rows.sort(key=lambda r: (r.seed, r.b, r.algorithm))
    return rows
