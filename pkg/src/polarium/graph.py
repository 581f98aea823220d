"""Weighted undirected graphs and opinion vectors.

The graph is stored sparsely: per-node sorted neighbor lists with parallel
weight arrays (CSR layout), plus a canonical edge list with each undirected
edge recorded once as (u, v, w) with u < v. Node identity is a dense integer
index 0..n-1. All values are immutable after construction; step functions and
metrics operate on them without mutation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightedGraph",
    "OpinionState",
    "BiasProfile",
    "weighted_degree",
    "neighbor_opinion_sum",
    "neighbor_sums",
    "laplacian_apply",
    "is_connected",
    "read_edge_list",
    "parse_edge_list",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _row_sums(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Per-row sums of a CSR value array; empty rows sum to 0."""
    n = indptr.size - 1
    if values.size == 0:
        return np.zeros(n, dtype=np.float64)
    starts = np.minimum(indptr[:-1], values.size - 1)
    out = np.add.reduceat(values, starts)
    return np.where(indptr[1:] == indptr[:-1], 0.0, out)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights and nonnegative self-weights.

    Self-influence lives only in ``self_weights``; the edge set contains no
    self-loops. Querying weight(i, j) and weight(j, i) yields the same value.
    """

    node_count: int
    edge_u: np.ndarray        # canonical edges, u < v
    edge_v: np.ndarray
    edge_w: np.ndarray
    self_weights: np.ndarray  # w_ii >= 0, length n
    adj_indptr: np.ndarray    # CSR over sorted neighbor lists
    adj_indices: np.ndarray
    adj_weights: np.ndarray
    degrees: np.ndarray = field(repr=False)  # weighted degree d_i (self-weight excluded)

    @classmethod
    def from_edges(cls, edges, self_weights=None, node_count=None) -> "WeightedGraph":
        """Build a graph from (i, j, w) triples.

        Rejects self-loops, duplicate edges (in either orientation), and
        non-positive weights. ``node_count`` defaults to max index + 1.
        """
        triples = [(int(i), int(j), float(w)) for i, j, w in edges]
        if node_count is None:
            hi = -1
            for i, j, _ in triples:
                hi = max(hi, i, j)
            if isinstance(self_weights, dict):
                for i in self_weights:
                    hi = max(hi, int(i))
            node_count = hi + 1
        n = int(node_count)
        if n < 1:
            raise ValueError("graph needs at least one node")

        u = np.empty(len(triples), dtype=np.int64)
        v = np.empty(len(triples), dtype=np.int64)
        w = np.empty(len(triples), dtype=np.float64)
        for idx, (i, j, wij) in enumerate(triples):
            if i == j:
                raise ValueError(f"self-loop ({i},{i}) not allowed; use a self-weight")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for {n} nodes")
            if not wij > 0.0:
                raise ValueError(f"edge ({i},{j}) has non-positive weight {wij}")
            u[idx], v[idx] = (i, j) if i < j else (j, i)
            w[idx] = wij
        if len(triples):
            order = np.lexsort((v, u))
            u, v, w = u[order], v[order], w[order]
            dup = (u[1:] == u[:-1]) & (v[1:] == v[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate edge ({u[k]},{v[k]})")

        sw = np.zeros(n, dtype=np.float64)
        if self_weights is not None:
            if isinstance(self_weights, dict):
                for i, wii in self_weights.items():
                    sw[int(i)] = float(wii)
            else:
                sw[:] = np.asarray(self_weights, dtype=np.float64)
        if (sw < 0).any():
            bad = int(np.flatnonzero(sw < 0)[0])
            raise ValueError(f"self-weight of node {bad} is negative")

        # CSR with neighbor lists sorted by index: lexsort the doubled edge
        # list by (source, destination) and slice rows out of it
        counts = np.bincount(u, minlength=n) + np.bincount(v, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        both_src = np.concatenate([u, v])
        both_dst = np.concatenate([v, u])
        both_w = np.concatenate([w, w])
        order = np.lexsort((both_dst, both_src))
        indices = both_dst[order]
        weights = both_w[order]

        deg = _row_sums(weights, indptr)

        return cls(
            node_count=n,
            edge_u=_readonly(u), edge_v=_readonly(v), edge_w=_readonly(w),
            self_weights=_readonly(sw),
            adj_indptr=_readonly(indptr),
            adj_indices=_readonly(indices),
            adj_weights=_readonly(weights),
            degrees=_readonly(deg),
        )

    def neighbors(self, node: int):
        """Sorted neighbor indices and parallel weights of ``node``."""
        self._check_node(node)
        lo, hi = self.adj_indptr[node], self.adj_indptr[node + 1]
        return self.adj_indices[lo:hi], self.adj_weights[lo:hi]

    def weight(self, i: int, j: int) -> float:
        """Weight of edge (i, j); 0.0 if absent. Symmetric by construction."""
        idx, w = self.neighbors(i)
        pos = np.searchsorted(idx, j)
        if pos < idx.size and idx[pos] == j:
            return float(w[pos])
        return 0.0

    def self_weight(self, node: int) -> float:
        self._check_node(node)
        return float(self.self_weights[node])

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.node_count:
            raise ValueError(f"node {node} out of range for {self.node_count} nodes")


@dataclass(frozen=True)
class OpinionState:
    """Opinion vector x(t) in [0,1]^n at time step t."""

    opinions: np.ndarray
    time_step: int = 0

    def __post_init__(self):
        arr = np.asarray(self.opinions, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("opinions must be a 1-D vector")
        if self.time_step < 0:
            raise ValueError("time_step must be nonnegative")
        if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0):
            bad = int(np.flatnonzero((arr < 0.0) | (arr > 1.0))[0])
            raise ValueError(f"opinion of node {bad} outside [0,1]: {arr[bad]}")
        object.__setattr__(self, "opinions", _readonly(arr))

    def __len__(self) -> int:
        return int(self.opinions.size)

    @classmethod
    def uniform(cls, n: int, value: float, time_step: int = 0) -> "OpinionState":
        return cls(np.full(n, float(value)), time_step)


@dataclass(frozen=True)
class BiasProfile:
    """Per-node assimilation-bias exponents b_i >= 0."""

    biases: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.biases, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("biases must be a 1-D vector")
        if arr.size and np.min(arr) < 0.0:
            bad = int(np.flatnonzero(arr < 0.0)[0])
            raise ValueError(f"bias of node {bad} is negative")
        object.__setattr__(self, "biases", _readonly(arr))

    def __len__(self) -> int:
        return int(self.biases.size)

    @classmethod
    def uniform(cls, n: int, b: float) -> "BiasProfile":
        return cls(np.full(n, float(b)))


def weighted_degree(graph: WeightedGraph, node: int) -> float:
    """Sum of incident edge weights d_i; the self-weight is excluded."""
    graph._check_node(node)
    return float(graph.degrees[node])


def neighbor_opinion_sum(graph: WeightedGraph, node: int, state: OpinionState) -> float:
    """Weighted sum of neighbor opinions s_i = sum_j w_ij x_j."""
    if len(state) != graph.node_count:
        raise ValueError(
            f"state has {len(state)} entries, graph has {graph.node_count} nodes"
        )
    idx, w = graph.neighbors(node)
    return float(np.dot(w, state.opinions[idx]))


def neighbor_sums(graph: WeightedGraph, values: np.ndarray) -> np.ndarray:
    """Vector of weighted neighbor sums for every node (sparse traversal)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size != graph.node_count:
        raise ValueError(
            f"vector has {values.size} entries, graph has {graph.node_count} nodes"
        )
    terms = graph.adj_weights * values[graph.adj_indices]
    return _row_sums(terms, graph.adj_indptr)


def laplacian_apply(graph: WeightedGraph, vec: np.ndarray) -> np.ndarray:
    """Apply the weighted Laplacian: (L v)_i = d_i v_i - sum_j w_ij v_j.

    Sparse edge traversal; no dense matrix is ever materialized.
    """
    vec = np.asarray(vec, dtype=np.float64)
    if vec.size != graph.node_count:
        raise ValueError(
            f"vector has {vec.size} entries, graph has {graph.node_count} nodes"
        )
    out = graph.degrees * vec
    wv = graph.edge_w * vec[graph.edge_v]
    wu = graph.edge_w * vec[graph.edge_u]
    np.subtract.at(out, graph.edge_u, wv)
    np.subtract.at(out, graph.edge_v, wu)
    return out


def is_connected(graph: WeightedGraph) -> bool:
    """Breadth-first connectivity check."""
    n = graph.node_count
    if n <= 1:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    reached = 1
    while queue:
        i = queue.popleft()
        for j in graph.adj_indices[graph.adj_indptr[i]:graph.adj_indptr[i + 1]]:
            if not seen[j]:
                seen[j] = True
                reached += 1
                queue.append(int(j))
    return reached == n


def parse_edge_list(text: str) -> WeightedGraph:
    """Parse edge-list text: one ``i j w`` record per line, plus optional
    ``self i w`` records. Blank lines and ``#`` comments are skipped; node
    count is inferred as max index + 1."""
    edges = []
    selfs: dict[int, float] = {}
    hi = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "self":
                if len(parts) != 3:
                    raise ValueError("expected 'self i w'")
                i, w = int(parts[1]), float(parts[2])
                selfs[i] = w
                hi = max(hi, i)
            else:
                if len(parts) != 3:
                    raise ValueError("expected 'i j w'")
                i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
                edges.append((i, j, w))
                hi = max(hi, i, j)
        except ValueError as exc:
            raise ValueError(f"edge list line {lineno}: {exc}") from None
    return WeightedGraph.from_edges(edges, self_weights=selfs, node_count=hi + 1)


def read_edge_list(path) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())
