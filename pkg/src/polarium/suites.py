"""Randomized verification suites: monotonicity of the disagreement indices
under averaging and flocking, the counterexample search for weight-dependent
averaging increasing the global index, majorization of flocking steps, and
the exact reduction of the biased update at zero bias.

These back both the test suite and the ``theorem-suite`` experiment family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import biased_step, degroot_step, flocking_step
from .graph import BiasProfile, OpinionState, WeightedGraph
from .metrics import gdi, is_majorized, ndi

__all__ = [
    "random_connected_graph",
    "random_state",
    "SuiteResult",
    "CounterexampleResult",
    "ndi_monotone_suite",
    "gdi_flocking_suite",
    "flocking_majorization_suite",
    "zero_bias_reduction_suite",
    "find_gdi_counterexample",
]

_REL_SLACK = 1e-12


def random_connected_graph(
    rng: np.random.Generator,
    max_n: int = 50,
    max_weight: float = 10.0,
    max_self: float = 10.0,
    min_n: int = 2,
) -> WeightedGraph:
    """Random connected weighted graph: a random spanning tree plus extra
    edges, weights in (0, max_weight], self-weights in [0, max_self)."""
    n = int(rng.integers(min_n, max_n + 1))
    pairs = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i != j:
            pairs.add((min(i, j), max(i, j)))
    pairs = sorted(pairs)
    weights = max_weight * (1.0 - rng.random(len(pairs)))  # (0, max_weight]
    selfs = max_self * rng.random(n)
    return WeightedGraph.from_edges(
        [(a, b, w) for (a, b), w in zip(pairs, weights)],
        self_weights=selfs,
        node_count=n,
    )


def random_state(rng: np.random.Generator, n: int, extremes: float = 0.0) -> OpinionState:
    """Random opinion vector; with probability ``extremes`` per entry the
    opinion is pushed to exactly 0 or 1."""
    x = rng.random(n)
    if extremes > 0.0:
        push = rng.random(n) < extremes
        x = np.where(push, np.round(x), x)
    return OpinionState(x)


@dataclass(frozen=True)
class SuiteResult:
    trials: int
    violations: int
    worst_excess: float  # most positive (after - before - slack) seen

    @property
    def passed(self) -> bool:
        return self.violations == 0


def ndi_monotone_suite(trials: int, rng: np.random.Generator, max_n: int = 50) -> SuiteResult:
    """Averaging can only lower the network disagreement index: check
    ndi(after) <= ndi(before) with relative slack on random connected
    weighted graphs and random states."""
    violations = 0
    worst = -np.inf
    for _ in range(trials):
        g = random_connected_graph(rng, max_n=max_n)
        x = random_state(rng, g.node_count)
        before = ndi(g, x)
        after = ndi(g, degroot_step(g, x))
        excess = after - before - _REL_SLACK * max(1.0, before)
        worst = max(worst, excess)
        if excess > 0.0:
            violations += 1
    return SuiteResult(trials, violations, worst)


def gdi_flocking_suite(trials: int, rng: np.random.Generator, max_n: int = 50) -> SuiteResult:
    """Flocking can only lower the global disagreement index: random
    (state, subset, epsilon) triples."""
    violations = 0
    worst = -np.inf
    for _ in range(trials):
        n = int(rng.integers(2, max_n + 1))
        x = random_state(rng, n)
        size = int(rng.integers(1, n + 1))
        subset = rng.choice(n, size=size, replace=False)
        eps = float(rng.random())
        before = gdi(x)
        after = gdi(flocking_step(x, subset, eps))
        excess = after - before - _REL_SLACK * max(1.0, before)
        worst = max(worst, excess)
        if excess > 0.0:
            violations += 1
    return SuiteResult(trials, violations, worst)


def flocking_majorization_suite(
    trials: int, rng: np.random.Generator, max_n: int = 50
) -> SuiteResult:
    """Every flocking step is majorized by its input (sums preserved)."""
    violations = 0
    for _ in range(trials):
        n = int(rng.integers(2, max_n + 1))
        x = random_state(rng, n)
        size = int(rng.integers(1, n + 1))
        subset = rng.choice(n, size=size, replace=False)
        eps = float(rng.random())
        y = flocking_step(x, subset, eps)
        if not is_majorized(y.opinions, x.opinions, tol=1e-12 * max(1, n)):
            violations += 1
    return SuiteResult(trials, violations, 0.0)


def zero_bias_reduction_suite(
    trials: int, rng: np.random.Generator, max_n: int = 16
) -> SuiteResult:
    """The biased update with all-zero biases must equal plain averaging
    bit-for-bit."""
    violations = 0
    for _ in range(trials):
        g = random_connected_graph(rng, max_n=max_n)
        x = random_state(rng, g.node_count, extremes=0.2)
        a = degroot_step(g, x).opinions
        b = biased_step(g, x, BiasProfile.uniform(g.node_count, 0.0)).opinions
        if not np.array_equal(a, b):
            violations += 1
    return SuiteResult(trials, violations, 0.0)


@dataclass(frozen=True)
class CounterexampleResult:
    found: bool
    trials_used: int
    gdi_before: float | None = None
    gdi_after: float | None = None
    edges: list | None = None  # (i, j, w) triples
    self_weights: list | None = None
    state: list | None = None


def find_gdi_counterexample(
    max_trials: int, rng: np.random.Generator
) -> CounterexampleResult:
    """Random search for a weighted graph and state where one averaging step
    strictly increases the global disagreement index (weights can be chosen
    adversarially because the global index ignores them)."""
    for t in range(1, max_trials + 1):
        g = random_connected_graph(rng, max_n=8, min_n=3, max_self=2.0)
        x = random_state(rng, g.node_count, extremes=0.5)
        before = gdi(x)
        after = gdi(degroot_step(g, x))
        if after > before + 1e-9 * max(1.0, before):
            return CounterexampleResult(
                found=True,
                trials_used=t,
                gdi_before=before,
                gdi_after=after,
                edges=[
                    (int(a), int(b), float(w))
                    for a, b, w in zip(g.edge_u, g.edge_v, g.edge_w)
                ],
                self_weights=[float(w) for w in g.self_weights],
                state=[float(v) for v in x.opinions],
            )
    return CounterexampleResult(found=False, trials_used=max_trials)
