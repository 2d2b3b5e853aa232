"""Sequential reconstruction and the Order&Extend active completion driver.

The low-rank factors ``X`` (``n1 x r``) and ``Y`` (``r x n2``) are computed
one row or column at a time. Solving for column ``j`` of ``Y`` uses the
already computed rows ``i`` of ``X`` with ``(i, j)`` known: their rows form
``A`` and the entries ``T[i, j]`` form ``t``. Rows of ``X`` are symmetric.
"""

from __future__ import annotations

import collections
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import (COL, ROW, MaskGraph, Node, Ordering, adjust_order,
                    build_mask_graph, smallest_last_order)
from .matrix import RANK_TOL, ObservedMatrix
from .oracle import QueryOracle, SurrogateSampler
from .stability import (RankDeficientError, condition_number, is_stable,
                        local_condition, solve_least_squares, stabilize)

LOCAL = "local"
KAPPA = "kappa"

# Median relative residual of overdetermined solves above which the data
# are treated as noisy (exact data sit near machine precision).
NOISE_FLOOR = 1e-6
# Noisy refits need this many multiples of r(n1+n2-r) known entries; on
# thinner masks the least-squares refit is worse than the sequential factors.
REFINE_OVERSAMPLING = 2.5


class FactorState:
    """Partially computed factors with per-row / per-column computed flags."""

    def __init__(self, n1: int, n2: int, r: int):
        self.r = r
        self.X = np.zeros((n1, r))
        self.Y = np.zeros((r, n2))
        self.row_done = np.zeros(n1, dtype=bool)
        self.col_done = np.zeros(n2, dtype=bool)

    def recovered(self) -> np.ndarray:
        return self.row_done[:, None] & self.col_done[None, :]

    def estimate(self) -> np.ndarray:
        return np.where(self.recovered(), self.X @ self.Y, 0.0)


@dataclass
class CompletionReport:
    estimate: np.ndarray
    recovered: np.ndarray
    queries: list
    unrecovered_nodes: list
    X: np.ndarray
    Y: np.ndarray
    deferrals: int = 0
    stabilizations: int = 0
    extended_mask: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def queries_used(self) -> int:
        return len(self.queries)

    @property
    def recovered_fraction(self) -> float:
        return float(self.recovered.mean())


@dataclass(frozen=True)
class LinearSystem:
    A: np.ndarray
    t: np.ndarray
    neighbors: np.ndarray

    @property
    def k(self) -> int:
        return len(self.t)


def _most_independent(A: np.ndarray, rows: np.ndarray) -> int:
    """Index of the row of ``rows`` that best conditions ``[A; row]``.

    Minimizes ``sigma_max / sigma_min`` of the stacked matrix (over its
    nonzero directions), then maximizes ``sigma_min``; earliest row on ties.
    """
    stacked = np.concatenate([np.broadcast_to(A, (len(rows),) + A.shape),
                              rows[:, None, :]], axis=1)
    s = np.linalg.svd(stacked, compute_uv=False)
    k = min(stacked.shape[1:]) - 1
    smin = s[:, k]
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(smin > RANK_TOL * s[:, 0], s[:, 0] / smin, np.inf)
    return int(np.lexsort((-smin, kappa))[0])


def select_seed(graph: MaskGraph, pi: Ordering, r: int) -> tuple[str, list[Node], Ordering]:
    """Choose ``r`` same-side seed nodes and move them to the front of ``pi``.

    The side whose ``r`` highest-degree nodes have the larger total degree
    wins (rows on ties); within it the highest-degree nodes are taken, lowest
    index first on ties. The rest of ``pi`` keeps its relative order.
    """
    deg = graph.degrees()
    sides = []
    for side, ids in ((ROW, np.arange(graph.n1)), (COL, graph.n1 + np.arange(graph.n2))):
        if len(ids) < r:
            continue
        # stable sort on -degree keeps lowest index first among ties
        top = ids[np.argsort(-deg[ids], kind="stable")[:r]]
        sides.append((int(deg[top].sum()), side, top))
    if not sides:
        raise ValueError(f"neither side has {r} nodes")
    best = sides[0]
    for cand in sides[1:]:
        if cand[0] > best[0]:
            best = cand
    _, side, top = best
    chosen = set(top.tolist())
    seeds = [u for u in pi if u in chosen]
    rest = [u for u in pi if u not in chosen]
    return side, [graph.node(u) for u in seeds], Ordering(seeds + rest)


def reconstruction_order(graph: MaskGraph, r: int, adjust_passes: int = 1):
    """Smallest-last order, adjusted, with the seed block moved to the front."""
    pi = smallest_last_order(graph)
    if adjust_passes:
        pi = adjust_order(graph, pi, r, passes=adjust_passes)
    return select_seed(graph, pi, r)


class _Engine:
    """Mutable state of one completion run.

    ``known``/``vals`` hold the extended mask: the input observations plus
    every entry revealed by the oracle so far.
    """

    def __init__(self, obs: ObservedMatrix, r: int, theta: float,
                 oracle: Optional[QueryOracle], budget: int, seed: int,
                 criterion: str, max_deferrals: int, max_extensions: int,
                 stabilize_systems: bool, noisy_equations: int = 0):
        n1, n2 = obs.shape
        if not 1 <= r <= min(n1, n2):
            raise ValueError(f"rank {r} out of range for a {n1}x{n2} matrix")
        if theta <= 0:
            raise ValueError("theta must be positive")
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        if criterion not in (LOCAL, KAPPA):
            raise ValueError(f"unknown instability criterion {criterion!r}")
        self.n1, self.n2, self.r = n1, n2, r
        self.theta = theta
        self.oracle = oracle
        self.budget = budget if oracle is not None else 0
        if oracle is not None:
            self.budget = min(self.budget, oracle.remaining_budget())
        self.criterion = criterion
        self.max_deferrals = max_deferrals
        self.max_extensions = max_extensions
        self.stabilize_systems = stabilize_systems
        self.noisy_equations = noisy_equations
        self.residuals: list[float] = []
        self.known = obs.mask.copy()
        self.vals = obs.values.copy()
        self.state = FactorState(n1, n2, r)
        self.surrogate = SurrogateSampler(self.known, self.vals, seed)
        self.queries: list[tuple[int, int, float]] = []
        self.deferrals = 0
        self.stabilizations = 0

    # -- node bookkeeping -------------------------------------------------

    def _line(self, u: int):
        """Opposite-side factors, computed flags, known flags and values for ``u``."""
        s = self.state
        if u < self.n1:
            return s.Y.T, s.col_done, self.known[u], self.vals[u]
        j = u - self.n1
        return s.X, s.row_done, self.known[:, j], self.vals[:, j]

    def _position(self, u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < self.n1 else (v, u - self.n1)

    def _done(self, u: int) -> bool:
        s = self.state
        return bool(s.row_done[u]) if u < self.n1 else bool(s.col_done[u - self.n1])

    def _store(self, u: int, y: np.ndarray) -> None:
        s = self.state
        if u < self.n1:
            s.X[u] = y
            s.row_done[u] = True
        else:
            s.Y[:, u - self.n1] = y
            s.col_done[u - self.n1] = True

    def seed(self, nodes: list[int]) -> None:
        for k, u in enumerate(nodes):
            self._store(u, np.eye(self.r)[k])

    def build_system(self, u: int) -> LinearSystem:
        fac, done, kn, vl = self._line(u)
        nb = np.flatnonzero(kn & done)
        return LinearSystem(fac[nb], vl[nb].copy(), nb)

    def _candidates(self, u: int) -> np.ndarray:
        """Computed opposite nodes whose entry with ``u`` is unknown and queryable."""
        _, done, kn, _ = self._line(u)
        cand = np.flatnonzero(done & ~kn)
        if self.oracle is not None:
            cand = np.array([v for v in cand.tolist()
                             if self.oracle.can_query(*self._position(u, v))],
                            dtype=np.intp)
        return cand

    def _opposite_load(self, u: int) -> np.ndarray:
        """Known entries per opposite-side line (live view for columns of a row)."""
        return self.known.sum(axis=0) if u < self.n1 else self.known.sum(axis=1)

    def _surrogate(self, u: int, v: int) -> float:
        return self.surrogate(*self._position(u, v))

    def _query(self, u: int, v: int) -> float:
        i, j = self._position(u, v)
        value = self.oracle.query(i, j)
        self.known[i, j] = True
        self.vals[i, j] = value
        self.queries.append((i, j, value))
        self.budget -= 1
        return value

    # -- stability criterion ---------------------------------------------

    def _stable(self, A: np.ndarray, t: np.ndarray) -> bool:
        if not self.stabilize_systems:
            return condition_number(A) < math.inf
        if self.criterion == KAPPA:
            return condition_number(A) < self.theta
        return is_stable(local_condition(A, t), self.theta)

    def _stabilize(self, u: int, A: np.ndarray, t: np.ndarray, cand: np.ndarray):
        fac = self._line(u)[0]
        if self.criterion == KAPPA:
            best, best_score = None, math.inf
            for v in cand.tolist():
                score = condition_number(np.vstack([A, fac[v]]))
                if score < best_score:
                    best, best_score = v, score
            return best if best is not None and best_score < self.theta else None
        pairs = [(v, fac[v]) for v in cand.tolist()]
        picked = stabilize(A, t, self.theta, pairs, lambda v: self._surrogate(u, v))
        return None if picked is None else picked[0]

    # -- repairs ----------------------------------------------------------

    @property
    def noisy(self) -> bool:
        """Whether residuals so far show the data are not exactly rank ``r``."""
        return bool(self.residuals) and float(np.median(self.residuals)) > NOISE_FLOOR

    def repair_incomplete(self, u: int, system: LinearSystem,
                          target: Optional[int] = None) -> Optional[LinearSystem]:
        """Query entries until ``u`` has ``target`` equations (default ``r``).

        Returns None, without spending anything, when the system cannot reach
        ``r`` equations; beyond ``r`` growth is best effort within budget.

        Picks are greedy, one at a time. The target of an unqueried entry is
        unknown, so each pick minimizes the condition number of the grown
        matrix, which bounds the local condition number for every target;
        ties go to the pick adding the strongest direction.
        """
        must = self.r - system.k
        want = (self.r if target is None else target) - system.k
        if want <= 0:
            return system
        if self.oracle is None:
            return system if must <= 0 else None
        cand = self._candidates(u)
        if must > 0 and (self.budget < must or len(cand) < must):
            return None
        fac = self._line(u)[0]
        load = self._opposite_load(u)
        A, t = system.A, system.t
        for step in range(min(want, len(cand), self.budget)):
            if step < must:
                v = _most_independent(A, fac[cand])
            else:
                # growth beyond r: least-loaded partners only, so queried
                # entries spread out instead of piling onto a few hubs
                low = np.flatnonzero(load[cand] == load[cand].min())
                v = int(low[_most_independent(A, fac[cand[low]])])
            best = int(cand[v])
            value = self._query(u, best)
            A = np.vstack([A, fac[best]])
            t = np.append(t, value)
            cand = np.delete(cand, v)
        return LinearSystem(A, t, system.neighbors)

    def repair_unstable(self, u: int, system: LinearSystem) -> Optional[LinearSystem]:
        """Extend an unstable system with queried equations; None means defer."""
        A, t = system.A, system.t
        extensions = 0
        while not self._stable(A, t):
            if not self.stabilize_systems or self.oracle is None:
                return None
            if extensions >= self.max_extensions or self.budget <= 0:
                return None
            cand = self._candidates(u)
            if len(cand) == 0:
                return None
            v = self._stabilize(u, A, t, cand)
            if v is None:
                return None
            value = self._query(u, v)
            self.stabilizations += 1
            A = np.vstack([A, self._line(u)[0][v]])
            t = np.append(t, value)
            extensions += 1
        return LinearSystem(A, t, system.neighbors) if extensions else system

    def process(self, u: int) -> bool:
        system = self.repair_incomplete(u, self.build_system(u))
        if system is None:
            return False
        system = self.repair_unstable(u, system)
        if system is None:
            return False
        try:
            y = solve_least_squares(system.A, system.t)
        except RankDeficientError:
            return False
        self._record_residual(system, y)
        self._store(u, y)
        return True

    def _record_residual(self, system: LinearSystem, y: np.ndarray) -> None:
        tnorm = np.linalg.norm(system.t)
        if system.k > self.r and tnorm > 0:
            self.residuals.append(float(np.linalg.norm(system.A @ y - system.t) / tnorm))

    def run(self, order: list[int]) -> None:
        queue = collections.deque(u for u in order if not self._done(u))
        count = collections.Counter()
        stall = 0
        while queue and stall < len(queue):
            u = queue.popleft()
            before = len(self.queries)
            if self.process(u):
                stall = 0
                continue
            self.deferrals += 1
            stall = 0 if len(self.queries) > before else stall + 1
            if count[u] < self.max_deferrals:
                count[u] += 1
                queue.append(u)

    def refine(self, sweeps: int) -> None:
        """Polish the factors once the data have shown noise.

        Remaining budget is spread over the computed nodes in rounds, one
        extra equation per node and round (fewest equations first), up to
        ``noisy_equations`` each; then, starting from a spectral estimate,
        rows and columns are re-solved alternately by least squares over the
        extended mask. Exact data never
        get here, so they cost nothing; neither do masks that cannot reach
        ``REFINE_OVERSAMPLING * r(n1+n2-r)`` entries.
        """
        if not self.noisy or self.noisy_equations <= self.r:
            return
        phi = self.r * (self.n1 + self.n2 - self.r)
        if self.known.sum() + self.budget < REFINE_OVERSAMPLING * phi:
            return
        nodes = [u for u in range(self.n1 + self.n2) if self._done(u)]
        for target in range(self.r + 1, self.noisy_equations + 1):
            sizes = [self.build_system(u).k for u in nodes]
            for k, u in sorted(zip(sizes, nodes)):
                if self.budget <= 0 or self.oracle is None:
                    break
                if k < target:
                    self.repair_incomplete(u, self.build_system(u), target)
        if sweeps > 0:
            self._spectral_start()
        for _ in range(sweeps):
            for u in nodes:
                system = self.build_system(u)
                if system.k < self.r:
                    continue
                try:
                    self._store(u, solve_least_squares(system.A, system.t))
                except RankDeficientError:
                    pass

    def _spectral_start(self) -> None:
        # Sequential factors carry noise compounded along the order; restart
        # from the rank-r SVD of the rescaled zero-filled extended matrix.
        M = np.where(self.known, self.vals, 0.0) / self.known.mean()
        U, sv, Vt = np.linalg.svd(M, full_matrices=False)
        root = np.sqrt(sv[: self.r])
        self.state.X[:] = U[:, : self.r] * root
        self.state.Y[:] = root[:, None] * Vt[: self.r]

    def finish_stragglers(self) -> None:
        # Nodes still unstable after their last deferral get a plain solve:
        # the local condition number depends on the seed basis, so some
        # systems never pass, and an imperfect factor beats a zero-filled line.
        progress = True
        while progress:
            progress = False
            for u in range(self.n1 + self.n2):
                if self._done(u):
                    continue
                system = self.repair_incomplete(u, self.build_system(u))
                if system is None:
                    continue
                try:
                    y = solve_least_squares(system.A, system.t)
                except RankDeficientError:
                    continue
                self._store(u, y)
                progress = True

    def report(self, graph: MaskGraph) -> CompletionReport:
        s = self.state
        unrecovered = [graph.node(u) for u in range(self.n1 + self.n2) if not self._done(u)]
        return CompletionReport(
            estimate=s.estimate(), recovered=s.recovered(),
            queries=list(self.queries), unrecovered_nodes=unrecovered,
            X=s.X.copy(), Y=s.Y.copy(), deferrals=self.deferrals,
            stabilizations=self.stabilizations, extended_mask=self.known.copy())


def order_and_extend(obs: ObservedMatrix, r: int, theta: float = 1.0,
                     oracle: Optional[QueryOracle] = None, budget: Optional[int] = None,
                     seed: int = 0, criterion: str = LOCAL, max_deferrals: int = 2,
                     max_extensions: Optional[int] = None,
                     adjust_passes: int = 1,
                     noisy_equations: Optional[int] = None,
                     refine_sweeps: int = 20) -> CompletionReport:
    """Active completion of ``obs`` at rank ``r``, querying ``oracle`` as needed.

    Incomplete systems are topped up to ``r`` equations with queried entries
    and unstable systems are extended one queried equation at a time; a
    system that cannot be fixed is moved to the back of the queue. Nodes
    still pending after their last deferral are solved as they stand if
    they have (or can be topped up to) ``r`` independent equations. Entries
    whose row or column is never computed are returned as 0 and flagged in
    ``recovered``. At most ``budget`` queries are made (default: whatever the
    oracle allows).

    When solved overdetermined systems leave residuals above
    ``NOISE_FLOOR`` the data are treated as noisy: after the pass, the
    remaining budget is spent growing every system, up to ``noisy_equations``
    equations each (default: no cap), and the factors are refitted over the
    extended mask with ``refine_sweeps`` alternating least-squares sweeps.
    Pass ``noisy_equations=r`` to disable.
    """
    if budget is None:
        budget = oracle.remaining_budget() if oracle is not None else 0
    engine = _Engine(obs, r, theta, oracle, budget, seed, criterion, max_deferrals,
                     r if max_extensions is None else max_extensions, True,
                     max(obs.shape) if noisy_equations is None else noisy_equations)
    graph = build_mask_graph(obs.mask)
    _, seeds, pi = reconstruction_order(graph, r, adjust_passes)
    engine.seed([graph.node_id(s) for s in seeds])
    engine.run(list(pi)[r:])
    engine.finish_stragglers()
    engine.refine(refine_sweeps)
    return engine.report(graph)


def sequential_complete(obs: ObservedMatrix, r: int, pi: Optional[Ordering] = None,
                        max_deferrals: int = 2) -> CompletionReport:
    """Complete ``obs`` along ``pi`` without queries.

    The first ``r`` nodes of ``pi`` must lie on one side and become the seed.
    Systems with fewer than ``r`` equations or a singular matrix are
    deferred; every other system is solved by least squares as is. Without
    ``pi`` the Order&Extend ordering is used.
    """
    graph = build_mask_graph(obs.mask)
    if pi is None:
        _, _, pi = reconstruction_order(graph, r)
    seq = list(pi)
    if len(seq) != graph.n_nodes:
        raise ValueError("ordering does not cover the mask graph")
    head = seq[:r]
    if len({graph.is_row(u) for u in head}) != 1:
        raise ValueError(f"the first {r} nodes of the ordering must share a side")
    engine = _Engine(obs, r, 1.0, None, 0, 0, LOCAL, max_deferrals, 0, False)
    engine.seed(head)
    engine.run(seq[r:])
    return engine.report(graph)
