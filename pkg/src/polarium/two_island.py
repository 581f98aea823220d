"""Two-island homophilous networks, their scalar opinion recurrence, and the
bias/homophily regime classifier.

A two-island network pins exact degrees: every node has n_same * p_s
neighbors on its own island and n_other * p_d across, with p_s > p_d. The
builder wires a deterministic circulant pattern inside each island and a
consecutive-block pattern across, so the graph is reproducible from its
parameters alone; an optional degree-preserving shuffle randomizes the wiring
without touching any degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import bias_pow
from .graph import WeightedGraph

__all__ = [
    "TwoIslandParams",
    "TwoIslandNetwork",
    "RegimeVerdict",
    "build_two_island",
    "homophily_degree",
    "island_update_map",
    "critical_homophily",
    "solve_fixed_point",
    "classify_regime",
    "degree_preserving_shuffle",
    "REGIME_POLARIZATION",
    "REGIME_DISAGREEMENT",
    "REGIME_CONSENSUS",
]

REGIME_POLARIZATION = "polarization"
REGIME_DISAGREEMENT = "persistent-disagreement"
REGIME_CONSENSUS = "consensus"

_INT_TOL = 1e-9


def _as_exact_int(x: float, what: str) -> int:
    r = round(x)
    if abs(x - r) > _INT_TOL:
        raise ValueError(f"{what} = {x} is not an integer; degree targets must be whole")
    return int(r)


@dataclass(frozen=True)
class TwoIslandParams:
    """Island sizes and link densities (p_s within, p_d across, p_s > p_d)."""

    n1: int
    n2: int
    p_s: float
    p_d: float

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("island sizes must be positive")
        if not (0.0 < self.p_d < 1.0 and 0.0 < self.p_s < 1.0):
            raise ValueError("p_s and p_d must lie strictly inside (0,1)")
        if not self.p_s > self.p_d:
            raise ValueError(
                "homophily requires p_s > p_d (within-island links denser than cross-island)"
            )
        # footnote-style integrality of all four degree targets
        _as_exact_int(self.n1 * self.p_s, "n1*p_s")
        _as_exact_int(self.n2 * self.p_s, "n2*p_s")
        _as_exact_int(self.n1 * self.p_d, "n1*p_d")
        _as_exact_int(self.n2 * self.p_d, "n2*p_d")

    @property
    def homophily(self) -> float:
        return self.p_s / self.p_d


@dataclass(frozen=True)
class TwoIslandNetwork:
    """Built graph together with its island labeling (0 or 1 per node)."""

    graph: WeightedGraph
    islands: np.ndarray
    params: TwoIslandParams

    @property
    def island1(self) -> np.ndarray:
        return np.flatnonzero(self.islands == 0)

    @property
    def island2(self) -> np.ndarray:
        return np.flatnonzero(self.islands == 1)


@dataclass(frozen=True)
class RegimeVerdict:
    """Predicted long-run behavior for islands started at (x0, 1-x0)."""

    regime: str
    predicted_limit: tuple  # (island-1 limit, island-2 limit)
    x_hat: float | None = None


def homophily_degree(params: TwoIslandParams) -> float:
    """Ratio p_s / p_d; strictly above 1 for valid parameters."""
    return params.homophily


def _circulant_edges(offset_base: int, size: int, degree: int):
    """Within-island circulant wiring: connect to the ``degree`` nearest
    cyclic offsets. An odd degree needs an even island (antipodal partner)."""
    if degree >= size:
        raise ValueError(
            f"within-island degree {degree} infeasible for island of size {size}"
        )
    edges = []
    half = degree // 2
    for off in range(1, half + 1):
        for i in range(size):
            j = (i + off) % size
            a, b = offset_base + i, offset_base + j
            if off == size - off and a > b:
                continue  # antipodal offset on an even cycle: avoid doubling
            edges.append((a, b))
    if degree % 2 == 1:
        if size % 2 != 0:
            raise ValueError(
                f"odd within-island degree {degree} with odd island size {size} "
                "is not realizable"
            )
        for i in range(size // 2):
            edges.append((offset_base + i, offset_base + i + size // 2))
    return edges


def build_two_island(
    params: TwoIslandParams,
    rng: np.random.Generator | None = None,
    shuffle_swaps: int = 0,
) -> TwoIslandNetwork:
    """Construct the exact-degree two-island graph: unit edge weights, zero
    self-weights, islands labeled 0 (nodes 0..n1-1) and 1 (the rest).

    Deterministic given the parameters. ``shuffle_swaps`` applies that many
    degree-preserving double-edge swaps using ``rng`` (wiring changes, every
    within/cross degree stays fixed)."""
    n1, n2 = params.n1, params.n2
    k1s = _as_exact_int(n1 * params.p_s, "n1*p_s")
    k2s = _as_exact_int(n2 * params.p_s, "n2*p_s")
    k1d = _as_exact_int(n2 * params.p_d, "n2*p_d")  # cross degree of island-1 nodes
    k2d = _as_exact_int(n1 * params.p_d, "n1*p_d")  # cross degree of island-2 nodes

    edges = []
    edges += _circulant_edges(0, n1, k1s)
    edges += _circulant_edges(n1, n2, k2s)
    # cross wiring: consecutive blocks of island-2 targets; every island-2
    # node receives exactly n1*p_d of the n1*k1d stubs
    for i in range(n1):
        for t in range(k1d):
            edges.append((i, n1 + (i * k1d + t) % n2))

    graph = WeightedGraph.from_edges(
        [(a, b, 1.0) for a, b in edges], node_count=n1 + n2
    )
    islands = np.concatenate([np.zeros(n1, np.int64), np.ones(n2, np.int64)])

    if shuffle_swaps > 0:
        if rng is None:
            raise ValueError("shuffling requires a random source")
        graph = degree_preserving_shuffle(graph, islands, rng, shuffle_swaps)

    _verify_degrees(graph, islands, k1s, k2s, k1d, k2d)
    return TwoIslandNetwork(graph=graph, islands=islands, params=params)


def _verify_degrees(graph, islands, k1s, k2s, k1d, k2d):
    n = graph.node_count
    for i in range(n):
        idx, _ = graph.neighbors(i)
        same = int(np.sum(islands[idx] == islands[i]))
        cross = idx.size - same
        want_same, want_cross = (k1s, k1d) if islands[i] == 0 else (k2s, k2d)
        if same != want_same or cross != want_cross:
            raise ValueError(
                f"degree sequence infeasible: node {i} got (within={same}, "
                f"cross={cross}), wanted ({want_same}, {want_cross})"
            )


def degree_preserving_shuffle(
    graph: WeightedGraph,
    islands: np.ndarray,
    rng: np.random.Generator,
    swaps: int,
) -> WeightedGraph:
    """Randomize wiring with double-edge swaps that stay inside each edge
    category (within island 1, within island 2, cross), so every node keeps
    its exact within/cross degrees. Proposals creating duplicates or
    self-loops are skipped."""
    u = graph.edge_u.copy()
    v = graph.edge_v.copy()
    cat = np.where(
        islands[u] == islands[v], islands[u], 2
    )  # 0: within island 1, 1: within island 2, 2: cross
    edge_set = {(int(a), int(b)) for a, b in zip(u, v)}
    by_cat = {c: np.flatnonzero(cat == c) for c in (0, 1, 2)}
    done = 0
    attempts = 0
    max_attempts = swaps * 20 + 100
    while done < swaps and attempts < max_attempts:
        attempts += 1
        pool = by_cat[int(rng.integers(3))]
        if pool.size < 2:
            continue
        e1, e2 = rng.choice(pool, size=2, replace=False)
        a, b = int(u[e1]), int(v[e1])
        c, d = int(u[e2]), int(v[e2])
        if cat[e1] == 2:
            # cross edges: u is island 1, v island 2; swap the island-2 ends
            p1, p2 = (a, d), (c, b)
        else:
            p1, p2 = (min(a, d), max(a, d)), (min(c, b), max(c, b))
        if p1[0] == p1[1] or p2[0] == p2[1]:
            continue
        if p1 in edge_set or p2 in edge_set or p1 == p2:
            continue
        edge_set.discard((a, b))
        edge_set.discard((c, d))
        edge_set.add(p1)
        edge_set.add(p2)
        u[e1], v[e1] = p1
        u[e2], v[e2] = p2
        done += 1
    return WeightedGraph.from_edges(
        [(int(a), int(b), 1.0) for a, b in zip(u, v)], node_count=graph.node_count
    )


def island_update_map(x: float, b: float, h: float) -> float:
    """Scalar recurrence for a representative island-1 opinion when island 2
    mirrors it at 1-x: x' = x^b (h x + 1-x) / (x^b (h x + 1-x) + (1-x)^b (h(1-x) + x)).

    Maps [1/2, 1] into itself; the extremes are absorbing for b > 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0,1]")
    up = bias_pow(x, b)
    down = bias_pow(1.0 - x, b)
    num = up * (h * x + (1.0 - x))
    den = num + down * (h * (1.0 - x) + x)
    if den == 0.0:
        return x
    return min(1.0, max(0.0, num / den))


def critical_homophily(y: float, b: float) -> float:
    """Homophily level at which opinion ``y`` is stationary for the island
    recurrence with bias ``b``.

    Piecewise: identically 1 at b=1, identically 0 at b=2, and 2/b - 1 at the
    midpoint. Elsewhere it is evaluated through the log-ratio r = log(y/(1-y))
    as exp((b-1)r) * expm1((2-b)r) / expm1(b r), which is cancellation-free
    near the midpoint and overflow-guarded near the extremes (an overflow is
    reported as +inf; root bracketing treats it as "above any target")."""
    if not b > 0.0:
        raise ValueError("b must be positive")
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0,1]")
    if b == 1.0:
        return 1.0
    if y == 0.0 or y == 1.0:
        return math.inf if b < 1.0 else 0.0
    r = math.log1p((2.0 * y - 1.0) / (1.0 - y))
    if r == 0.0:
        return 2.0 / b - 1.0
    ra = abs(r)
    if ra > 50.0:  # both expm1 terms are pure exponentials to ~1e-21
        t = (1.0 - b) * ra
        return math.inf if t > 709.0 else math.exp(t)
    return math.exp((b - 1.0) * ra) * math.expm1((2.0 - b) * ra) / math.expm1(b * ra)


def solve_fixed_point(b: float, h: float, tol: float = 1e-12) -> float:
    """Unique stationary island opinion in [1/2, 1) for the persistent-
    disagreement regime (1 > b >= 2/(h+1)), by bisection on the strictly
    increasing ``critical_homophily``."""
    if not h > 1.0:
        raise ValueError("homophily degree must exceed 1")
    if not 0.0 < b < 1.0:
        raise ValueError("persistent disagreement needs 0 < b < 1")
    if b < 2.0 / (h + 1.0):
        raise ValueError(
            f"b={b} below the disagreement floor 2/(h+1)={2.0 / (h + 1.0)}; "
            "the only fixed point is consensus"
        )
    lo, hi = 0.5, 1.0 - 1e-12
    f_lo = critical_homophily(lo, b)
    if f_lo >= h:
        return 0.5  # boundary b = 2/(h+1): the midpoint is the fixed point
    if critical_homophily(hi, b) <= h:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if critical_homophily(mid, b) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_regime(b: float, h: float) -> RegimeVerdict:
    """Predicted limits for islands started at (x0, 1-x0) with 1/2 < x0 < 1:
    full split at b >= 1, a strict interior split for 1 > b >= 2/(h+1), and
    consensus at 1/2 below that."""
    if not b > 0.0:
        raise ValueError("b must be positive")
    if not h > 1.0:
        raise ValueError("homophily degree must exceed 1")
    if b >= 1.0:
        return RegimeVerdict(REGIME_POLARIZATION, (1.0, 0.0))
    if b >= 2.0 / (h + 1.0):
        x_hat = solve_fixed_point(b, h)
        return RegimeVerdict(REGIME_DISAGREEMENT, (x_hat, 1.0 - x_hat), x_hat)
    return RegimeVerdict(REGIME_CONSENSUS, (0.5, 0.5))
