"""Divergence measures over opinion vectors and the majorization order.

The network disagreement index weighs squared opinion gaps along edges; the
global disagreement index sums squared gaps over all pairs regardless of the
graph. Both are zero exactly at consensus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import OpinionState, WeightedGraph

__all__ = [
    "DivergenceReport",
    "divergence_report",
    "ndi",
    "gdi",
    "convex_divergence",
    "CONVEX_CATALOG",
    "is_majorized",
    "is_polarizing",
]


def _vec(state) -> np.ndarray:
    if isinstance(state, OpinionState):
        return state.opinions
    return np.asarray(state, dtype=np.float64)


@dataclass(frozen=True)
class DivergenceReport:
    """Both disagreement indices for one time step. On a connected graph both
    are zero exactly when the state is a consensus."""

    ndi: float
    gdi: float
    time_step: int


def divergence_report(graph: WeightedGraph, state: OpinionState) -> DivergenceReport:
    return DivergenceReport(ndi=ndi(graph, state), gdi=gdi(state),
                            time_step=state.time_step)


def ndi(graph: WeightedGraph, state) -> float:
    """Network disagreement index: sum over edges of w_ij (x_i - x_j)^2,
    each undirected edge counted once."""
    x = _vec(state)
    if x.size != graph.node_count:
        raise ValueError(
            f"state has {x.size} entries, graph has {graph.node_count} nodes"
        )
    d = x[graph.edge_u] - x[graph.edge_v]
    return float(np.dot(graph.edge_w, d * d))


def gdi(state) -> float:
    """Global disagreement index: sum over unordered pairs of (x_i - x_j)^2.
    Graph-independent."""
    x = _vec(state)
    if x.size < 2:
        return 0.0
    iu, ju = np.triu_indices(x.size, k=1)
    d = x[iu] - x[ju]
    return float(np.dot(d, d))


CONVEX_CATALOG = {
    "square": lambda d: d * d,
    "abs": lambda d: d,
    "expm1": np.expm1,
}


def convex_divergence(state, h) -> float:
    """Generalized pairwise divergence sum_{i<j} h(|x_i - x_j|) for a convex
    h with h(0)=0, taken from the built-in catalog (or a callable)."""
    if callable(h):
        fn = h
    else:
        try:
            fn = CONVEX_CATALOG[h]
        except KeyError:
            raise ValueError(
                f"unknown divergence '{h}'; catalog: {sorted(CONVEX_CATALOG)}"
            ) from None
    x = _vec(state)
    if x.size < 2:
        return 0.0
    iu, ju = np.triu_indices(x.size, k=1)
    return float(np.sum(fn(np.abs(x[iu] - x[ju]))))


def is_majorized(candidate, reference, tol: float = 1e-12) -> bool:
    """True when ``reference`` majorizes ``candidate``: after sorting both in
    decreasing order, every prefix sum of the candidate is at most the
    reference's, and the totals agree within ``tol``. Ties count as majorized.
    """
    a = np.asarray(candidate, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("vectors must be 1-D and of equal length")
    pa = np.cumsum(np.sort(a)[::-1])
    pb = np.cumsum(np.sort(b)[::-1])
    if abs(pa[-1] - pb[-1]) > tol:
        return False
    return bool(np.all(pa <= pb + tol))


def is_polarizing(graph: WeightedGraph, initial, final) -> bool:
    """A process run is polarizing exactly when it increased the network
    disagreement index."""
    return ndi(graph, final) > ndi(graph, initial)
