"""Bipartite mask graph and reconstruction orderings.

Nodes are addressed internally by a flat integer id: rows take ids
``0 .. n1-1`` and columns take ``n1 .. n1+n2-1``. :class:`Node` is the
readable form used at the API boundary.
"""

from __future__ import annotations

import heapq
from typing import NamedTuple, Sequence

import numpy as np

ROW = "row"
COL = "col"


class Node(NamedTuple):
    side: str
    index: int

    def __str__(self):
        return f"{self.side}{self.index}"


class MaskGraph:
    """Bipartite graph with one edge per observed position."""

    def __init__(self, n1: int, n2: int, adjacency: Sequence[np.ndarray]):
        self.n1 = n1
        self.n2 = n2
        self.adj = [np.asarray(a, dtype=np.intp) for a in adjacency]

    @property
    def n_nodes(self) -> int:
        return self.n1 + self.n2

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj[: self.n1])

    def node_id(self, node: Node) -> int:
        side, index = node
        if side == ROW:
            if not 0 <= index < self.n1:
                raise IndexError(f"row {index} out of range")
            return index
        if side == COL:
            if not 0 <= index < self.n2:
                raise IndexError(f"column {index} out of range")
            return self.n1 + index
        raise ValueError(f"unknown side {side!r}")

    def node(self, u: int) -> Node:
        return Node(ROW, u) if u < self.n1 else Node(COL, u - self.n1)

    def is_row(self, u: int) -> bool:
        return u < self.n1

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adj], dtype=np.intp)

    def neighbors(self, u: int) -> np.ndarray:
        return self.adj[u]


def build_mask_graph(mask: np.ndarray) -> MaskGraph:
    mask = np.asarray(mask, dtype=bool)
    n1, n2 = mask.shape
    adj = [np.flatnonzero(mask[i]) + n1 for i in range(n1)]
    adj += [np.flatnonzero(mask[:, j]) for j in range(n2)]
    return MaskGraph(n1, n2, adj)


class Ordering:
    """A permutation of all graph nodes with O(1) position lookup."""

    def __init__(self, sequence: Sequence[int]):
        seq = np.asarray(sequence, dtype=np.intp)
        pos = np.full(len(seq), -1, dtype=np.intp)
        if len(seq) and (seq.min() < 0 or seq.max() >= len(seq)):
            raise ValueError("ordering contains an out-of-range node")
        pos[seq] = np.arange(len(seq))
        if np.any(pos < 0):
            raise ValueError("ordering is not a permutation")
        self.sequence = seq
        self.position = pos

    def __len__(self):
        return len(self.sequence)

    def __iter__(self):
        return iter(self.sequence.tolist())

    def __eq__(self, other):
        return isinstance(other, Ordering) and np.array_equal(self.sequence, other.sequence)

    def __repr__(self):
        return f"Ordering({self.sequence.tolist()})"

    def nodes(self, graph: MaskGraph) -> list[Node]:
        return [graph.node(u) for u in self.sequence.tolist()]


def smallest_last_order(graph: MaskGraph) -> Ordering:
    """Smallest-last (degeneracy) ordering.

    Repeatedly removes a minimum-degree node and places it in the last free
    position. Among tied nodes the one latest in canonical order (columns
    after rows, higher index after lower) is removed first, so ties keep
    canonical order in the result: an edgeless graph yields all rows then
    all columns, ascending.
    """
    n = graph.n_nodes
    deg = graph.degrees().tolist()
    heap = [(d, -u) for u, d in enumerate(deg)]
    heapq.heapify(heap)
    removed = [False] * n
    order = [0] * n
    slot = n - 1
    while heap:
        d, neg_u = heapq.heappop(heap)
        u = -neg_u
        if removed[u] or d != deg[u]:
            continue
        removed[u] = True
        order[slot] = u
        slot -= 1
        for v in graph.adj[u].tolist():
            if not removed[v]:
                deg[v] -= 1
                heapq.heappush(heap, (deg[v], -v))
    return Ordering(order)


def adjust_order(graph: MaskGraph, pi: Ordering, r: int, passes: int = 1) -> Ordering:
    """Reposition nodes so each gets indegree close to ``r``.

    Nodes are visited in the order they had at the start of the pass. A node
    of degree ``<= r`` moves to immediately after its latest neighbor; a node
    of degree ``> r`` moves to immediately after the neighbor holding the
    ``r``-th smallest position. Isolated nodes stay put.
    """
    seq = pi.sequence.tolist()
    for _ in range(passes):
        for u in list(seq):
            reposition(graph, seq, u, r)
    return Ordering(seq)


def reposition(graph: MaskGraph, seq: list[int], u: int, r: int) -> None:
    """Apply the repositioning rule to the single node ``u``, in place."""
    nbrs = graph.adj[u]
    if len(nbrs) == 0:
        return
    seq.remove(u)
    where = {v: k for k, v in enumerate(seq)}
    npos = sorted(where[v] for v in nbrs.tolist())
    target = npos[-1] if len(npos) <= r else npos[r - 1]
    seq.insert(target + 1, u)


def implied_indegree(graph: MaskGraph, pi: Ordering, u: int) -> int:
    """Number of neighbors of ``u`` that precede it in ``pi``."""
    nbrs = graph.adj[u]
    return int(np.count_nonzero(pi.position[nbrs] < pi.position[u]))


def order_deficiency(graph: MaskGraph, pi: Ordering, r: int) -> int:
    """Edges that must be added for every non-seed node to have indegree ``r``.

    The first ``r`` positions are the seed and are not counted.
    """
    if r <= 0:
        return 0
    total = 0
    for u in pi.sequence[r:].tolist():
        total += max(0, r - implied_indegree(graph, pi, u))
    return total
