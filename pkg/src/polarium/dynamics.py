"""Opinion-update processes: repeated averaging, biased assimilation, the
single-agent fixed-environment map, flocking, and the stochastic urn exchange.

All step functions are pure: they map inputs to a fresh state. Updates are
simultaneous (synchronous) across nodes. Random sources are always explicit
parameters, never ambient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    BiasProfile,
    OpinionState,
    WeightedGraph,
    is_connected,
    neighbor_sums,
)

__all__ = [
    "EnvironmentParams",
    "FlockingParams",
    "ConvergenceSpec",
    "UrnState",
    "Trajectory",
    "degroot_step",
    "biased_step",
    "single_agent_step",
    "polarization_threshold",
    "flocking_step",
    "urn_step",
    "run_until_convergence",
    "run_single_agent",
    "bias_pow",
]

_TINY = float(np.finfo(np.float64).tiny)


def bias_pow(x, b):
    """Elementwise x**b with the conventions the update rules rely on.

    0**0 == 1 (so b=0 reduces exactly to plain averaging), 0**b == 0 and
    1**b == 1 exactly for b > 0, and interior values computed as
    exp(b*log(x)) with the log argument floored at the smallest positive
    normal so subnormal opinions cannot produce -inf logs.
    """
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(b * np.log(np.maximum(x, _TINY)))
    out = np.where(b == 0.0, 1.0, out)
    out = np.where((x == 0.0) & (b > 0.0), 0.0, out)
    out = np.where(x == 1.0, 1.0, out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class EnvironmentParams:
    """Single agent facing a fixed environment: self-weight w, environment
    opinion s in (0,1), and bias exponent b."""

    self_weight: float
    env_opinion: float
    bias: float

    def __post_init__(self):
        if not self.self_weight >= 0.0:
            raise ValueError("self_weight must be nonnegative")
        if not 0.0 < self.env_opinion < 1.0:
            raise ValueError("env_opinion must lie strictly inside (0,1)")
        if not self.bias >= 0.0:
            raise ValueError("bias must be nonnegative")


@dataclass(frozen=True)
class FlockingParams:
    """Contraction rate epsilon in [0,1] and the per-step subset schedule."""

    epsilon: float
    subset_schedule: tuple

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0,1]")
        sched = tuple(tuple(int(i) for i in s) for s in self.subset_schedule)
        for t, s in enumerate(sched):
            if not s:
                raise ValueError(f"subset at step {t} is empty")
        object.__setattr__(self, "subset_schedule", sched)


@dataclass(frozen=True)
class ConvergenceSpec:
    """Stop when the sup-norm one-step change drops below ``tolerance`` or
    after ``max_iters`` steps, whichever comes first."""

    tolerance: float = 1e-10
    max_iters: int = 10**6

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class UrnState:
    """Per-node (red, blue) ball counts; totals stay constant over time."""

    red: np.ndarray
    blue: np.ndarray

    def __post_init__(self):
        red = np.asarray(self.red, dtype=np.int64)
        blue = np.asarray(self.blue, dtype=np.int64)
        if red.shape != blue.shape or red.ndim != 1:
            raise ValueError("red and blue must be 1-D vectors of equal length")
        if (red < 0).any() or (blue < 0).any():
            raise ValueError("ball counts must be nonnegative")
        if ((red + blue) <= 0).any():
            bad = int(np.flatnonzero(red + blue <= 0)[0])
            raise ValueError(f"urn of node {bad} is empty")
        for name, arr in (("red", red), ("blue", blue)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def totals(self) -> np.ndarray:
        return self.red + self.blue

    def red_fractions(self) -> np.ndarray:
        return self.red / self.totals


@dataclass(frozen=True)
class Trajectory:
    """Recorded run of the biased process: thinned snapshots, final state,
    and bookkeeping (convergence flag, step count, degenerate nodes)."""

    times: list
    states: list
    final_state: OpinionState
    converged: bool
    iterations: int
    degenerate_nodes: list


def _update_kernel(graph, x, up, down):
    """Shared simultaneous update. up/down are the per-node weighting factors
    applied to neighbor support for 1 and for 0.

    Returns (new opinions, indices where the denominator vanished and the
    opinion was held fixed).
    """
    s = neighbor_sums(graph, x)
    w = graph.self_weights
    num = w * x + up * s
    den = w + up * s + down * (graph.degrees - s)
    degenerate = den == 0.0
    safe = np.where(degenerate, 1.0, den)
    out = np.where(degenerate, x, num / safe)
    return np.clip(out, 0.0, 1.0), np.flatnonzero(degenerate)


def _check_step_preconditions(graph, state):
    if len(state) != graph.node_count:
        raise ValueError(
            f"state has {len(state)} entries, graph has {graph.node_count} nodes"
        )
    dead = (graph.degrees + graph.self_weights) == 0.0
    if dead.any():
        bad = int(np.flatnonzero(dead)[0])
        raise ValueError(
            f"node {bad} is isolated with zero self-weight; its update divides by zero"
        )


def degroot_step(graph: WeightedGraph, state: OpinionState) -> OpinionState:
    """One simultaneous averaging step:
    x_i' = (w_ii x_i + s_i) / (w_ii + d_i)."""
    _check_step_preconditions(graph, state)
    ones = np.ones(graph.node_count)
    out, _ = _update_kernel(graph, state.opinions, ones, ones)
    return OpinionState(out, state.time_step + 1)


def biased_step(
    graph: WeightedGraph,
    state: OpinionState,
    biases: BiasProfile,
    degenerate_out: list | None = None,
) -> OpinionState:
    """One simultaneous biased-assimilation step:
    x_i' = (w_ii x_i + x_i^{b_i} s_i) / (w_ii + x_i^{b_i} s_i + (1-x_i)^{b_i}(d_i - s_i)).

    With all-zero biases this is bit-for-bit identical to ``degroot_step``.
    A vanishing denominator (only possible at boundary opinions with zero
    self-weight) leaves that node's opinion fixed; the node index is appended
    to ``degenerate_out`` when a list is supplied.
    """
    _check_step_preconditions(graph, state)
    if len(biases) != graph.node_count:
        raise ValueError(
            f"bias profile has {len(biases)} entries, graph has {graph.node_count} nodes"
        )
    x = state.opinions
    up = bias_pow(x, biases.biases)
    down = bias_pow(1.0 - x, biases.biases)
    out, flagged = _update_kernel(graph, x, up, down)
    if degenerate_out is not None:
        degenerate_out.extend(int(i) for i in flagged)
    return OpinionState(out, state.time_step + 1)


def single_agent_step(params: EnvironmentParams, x: float) -> float:
    """One update of a lone agent against a fixed environment:
    x' = (w x + x^b s) / (w + x^b s + (1-x)^b (1-s))."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("opinion must lie in [0,1]")
    w, s, b = params.self_weight, params.env_opinion, params.bias
    up = bias_pow(x, b)
    down = bias_pow(1.0 - x, b)
    num = w * x + up * s
    den = w + up * s + down * (1.0 - s)
    if den == 0.0:  # only at w=0 with a boundary opinion; boundary is absorbing
        return x
    return min(1.0, max(0.0, num / den))


def polarization_threshold(s: float, b: float) -> float:
    """The opinion at which the single-agent map is stationary:
    s^{1/(1-b)} / (s^{1/(1-b)} + (1-s)^{1/(1-b)}).

    Computed in log space so extreme exponents near b=1 cannot overflow.
    Undefined at b=1 (the exponent blows up; the stationary point degenerates
    toward s), so b=1 is rejected.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie strictly inside (0,1)")
    if not b >= 0.0:
        raise ValueError("b must be nonnegative")
    if b == 1.0:
        raise ValueError("threshold undefined at b=1 (limiting case)")
    if b == 0.0:
        return s
    e = 1.0 / (1.0 - b)
    t = e * (math.log1p(-s) - math.log(s))
    # stable logistic: 1 / (1 + exp(t))
    if t >= 0.0:
        z = math.exp(-t)
        return z / (1.0 + z)
    return 1.0 / (1.0 + math.exp(t))


def flocking_step(state: OpinionState, subset, epsilon: float) -> OpinionState:
    """Members of ``subset`` move the fraction ``epsilon`` of the way to the
    subset's mean opinion; everyone else is unchanged."""
    members = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.int64)
    if members.size == 0:
        raise ValueError("subset must be nonempty")
    if members[0] < 0 or members[-1] >= len(state):
        raise ValueError("subset contains out-of-range nodes")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0,1]")
    x = state.opinions.copy()
    mean = float(np.mean(x[members]))
    x[members] = (1.0 - epsilon) * x[members] + epsilon * mean
    return OpinionState(np.clip(x, 0.0, 1.0), state.time_step + 1)


def urn_step(urns: UrnState, graph: WeightedGraph, rng: np.random.Generator) -> UrnState:
    """One synchronous round of the two-ball exchange (the b=1 urn picture).

    Every node draws one ball from a weight-chosen neighbor's urn and one
    from its own, both against the pre-step contents. On a color match the
    neighbor's ball joins the urn and a uniformly chosen ball is discarded;
    on a mismatch nothing changes. Totals are preserved per node.
    """
    n = graph.node_count
    if n != urns.red.size:
        raise ValueError("urn state size does not match graph")
    if not is_connected(graph):
        raise ValueError("urn dynamic requires a connected graph")
    red, tot = urns.red, urns.totals
    new_red = urns.red.copy()
    for i in range(n):
        idx, w = graph.neighbors(i)
        j = int(rng.choice(idx, p=w / w.sum()))
        drawn_red = rng.random() < red[j] / tot[j]
        own_red = rng.random() < red[i] / tot[i]
        if drawn_red != own_red:
            continue
        r = red[i] + (1 if drawn_red else 0)
        discard_red = rng.random() < r / (tot[i] + 1)
        new_red[i] = r - (1 if discard_red else 0)
    return UrnState(new_red, urns.totals - new_red)


def run_until_convergence(
    graph: WeightedGraph,
    initial: OpinionState,
    biases: BiasProfile,
    spec: ConvergenceSpec,
    record_every: int = 1,
) -> Trajectory:
    """Iterate ``biased_step`` until the sup-norm step change drops below the
    tolerance or the iteration budget runs out.

    Non-convergence is reported via ``converged=False``, never raised. The
    recorded trajectory is thinned to every ``record_every``-th step (the
    initial and final states are always kept).
    """
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    if not is_connected(graph):
        raise ValueError("dynamics require a connected graph")
    _check_step_preconditions(graph, initial)

    degenerate: set[int] = set()
    times = [initial.time_step]
    states = [initial.opinions]
    state = initial
    converged = False
    iterations = 0
    for _ in range(spec.max_iters):
        flagged: list[int] = []
        new = biased_step(graph, state, biases, degenerate_out=flagged)
        degenerate.update(flagged)
        iterations += 1
        delta = float(np.max(np.abs(new.opinions - state.opinions)))
        state = new
        if iterations % record_every == 0:
            times.append(state.time_step)
            states.append(state.opinions)
        if delta < spec.tolerance:
            converged = True
            break
    if times[-1] != state.time_step:
        times.append(state.time_step)
        states.append(state.opinions)
    return Trajectory(
        times=times,
        states=states,
        final_state=state,
        converged=converged,
        iterations=iterations,
        degenerate_nodes=sorted(degenerate),
    )


@dataclass(frozen=True)
class SingleAgentRun:
    xs: list
    final: float
    converged: bool
    iterations: int


def run_single_agent(
    params: EnvironmentParams, x0: float, spec: ConvergenceSpec
) -> SingleAgentRun:
    """Iterate the single-agent map from x0 under the same stopping rule as
    the network runs."""
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0,1]")
    xs = [float(x0)]
    x = float(x0)
    converged = False
    iterations = 0
    for _ in range(spec.max_iters):
        nxt = single_agent_step(params, x)
        iterations += 1
        delta = abs(nxt - x)
        x = nxt
        xs.append(x)
        if delta < spec.tolerance:
            converged = True
            break
    return SingleAgentRun(xs=xs, final=x, converged=converged, iterations=iterations)
