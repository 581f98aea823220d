"""User-item bipartite graphs, three random-walk recommenders, acceptance
models, and Monte Carlo polarization estimation.

Items carry RED/BLUE labels used only for measurement; the algorithms are
label-blind. Item indices 0..n-1 are RED, n..2n-1 are BLUE. A probe user with
a controlled opinion can be planted on top of a sampled graph as a lightweight
overlay (user index m); walks and recommenders treat it like any other user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OpinionDistribution",
    "GenerativeParams",
    "BipartiteGraph",
    "ProbedGraph",
    "RecommenderConfig",
    "AcceptanceMode",
    "PolarizationEstimate",
    "LimitingQuantity",
    "LimitingReport",
    "sample_bipartite_graph",
    "plant_probe",
    "walk_distribution",
    "simple_salsa",
    "simple_ppr",
    "simple_icf",
    "recommend",
    "acceptance_decision",
    "estimate_polarization",
    "limiting_quantities",
]


@dataclass(frozen=True)
class OpinionDistribution:
    """Latent-opinion law, symmetric about 1/2 with positive variance.

    Catalog: ``uniform`` on (0,1), ``beta`` with shape alpha on both sides,
    ``twopoint`` at 1/2 +- delta.
    """

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if self.param is not None:
                raise ValueError("uniform takes no parameter")
        elif self.kind == "beta":
            if self.param is None or not self.param > 0:
                raise ValueError("beta needs a positive shape parameter")
        elif self.kind == "twopoint":
            if self.param is None or not 0.0 < self.param <= 0.5:
                raise ValueError("twopoint needs a spread delta in (0, 0.5]")
        else:
            raise ValueError(
                f"unknown opinion distribution '{self.kind}'; "
                "catalog: uniform, beta, twopoint"
            )

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return 1.0 / 12.0
        if self.kind == "beta":
            return 1.0 / (4.0 * (2.0 * self.param + 1.0))
        return self.param * self.param

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return rng.random(size)
        if self.kind == "beta":
            return rng.beta(self.param, self.param, size)
        signs = rng.integers(0, 2, size) * 2 - 1
        return 0.5 + self.param * signs


@dataclass(frozen=True)
class GenerativeParams:
    """Bipartite generator: n items per color, m users, expected k books per
    user, and the opinion law."""

    n: int
    m: int
    k: float
    distribution: OpinionDistribution = OpinionDistribution("uniform")

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not 0.0 < self.k < self.n:
            raise ValueError("k must satisfy 0 < k < n")


@dataclass(frozen=True)
class BipartiteGraph:
    """Users 0..m-1 and items 0..2n-1 (first n RED) in CSR form, plus the
    latent opinions the edges were drawn from."""

    n: int
    opinions: np.ndarray
    user_indptr: np.ndarray
    user_items: np.ndarray
    item_indptr: np.ndarray
    item_users: np.ndarray
    params: GenerativeParams | None = None

    @property
    def m(self) -> int:
        return int(self.opinions.size)

    @property
    def item_count(self) -> int:
        return 2 * self.n

    def is_red(self, item: int) -> bool:
        return 0 <= item < self.n

    def user_degree(self, user: int) -> int:
        return int(self.user_indptr[user + 1] - self.user_indptr[user])

    def item_degree(self, item: int) -> int:
        return int(self.item_indptr[item + 1] - self.item_indptr[item])

    def items_of(self, user: int) -> np.ndarray:
        return self.user_items[self.user_indptr[user]:self.user_indptr[user + 1]]

    def users_of(self, item: int) -> np.ndarray:
        return self.item_users[self.item_indptr[item]:self.item_indptr[item + 1]]

    def user_degrees(self) -> np.ndarray:
        return np.diff(self.user_indptr)

    def item_degrees(self) -> np.ndarray:
        return np.diff(self.item_indptr)

    def red_fraction(self, user: int) -> float:
        """Owned-RED fraction; the user's opinion in this module."""
        items = self.items_of(user)
        if items.size == 0:
            raise ValueError(f"user {user} owns no items")
        return float(np.count_nonzero(items < self.n) / items.size)


@dataclass(frozen=True)
class ProbedGraph:
    """A sampled graph plus one planted probe user (index ``base.m``).

    The probe owns ``probe_items``; item degrees are adjusted accordingly.
    Walks across the overlay see one bipartite graph with m+1 users.
    """

    base: BipartiteGraph
    probe_items: np.ndarray
    item_degs: np.ndarray = field(repr=False)  # base degrees + probe increments

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m + 1

    @property
    def item_count(self) -> int:
        return self.base.item_count

    @property
    def probe_user(self) -> int:
        return self.base.m

    def is_red(self, item: int) -> bool:
        return self.base.is_red(item)

    def user_degree(self, user: int) -> int:
        if user == self.probe_user:
            return int(self.probe_items.size)
        return self.base.user_degree(user)

    def item_degree(self, item: int) -> int:
        return int(self.item_degs[item])

    def items_of(self, user: int) -> np.ndarray:
        if user == self.probe_user:
            return self.probe_items
        return self.base.items_of(user)

    def users_of(self, item: int) -> np.ndarray:
        owners = self.base.users_of(item)
        if self.item_degs[item] != owners.size:  # probe owns this item
            return np.concatenate([owners, [self.probe_user]])
        return owners


@dataclass(frozen=True)
class RecommenderConfig:
    """Algorithm selection and walk budget. ``t_walks=None`` is EXACT mode:
    the argmax is taken over the exact walk distribution (the infinite-walk
    limit). Ties always break to the lowest item index."""

    algorithm: str
    t_walks: int | None = None

    def __post_init__(self):
        if self.algorithm not in ("salsa", "ppr", "icf"):
            raise ValueError("algorithm must be one of salsa, ppr, icf")
        if self.t_walks is not None and self.t_walks < 1:
            raise ValueError("t_walks must be at least 1 in sampled mode")
        if self.algorithm == "salsa" and self.t_walks is not None:
            raise ValueError("salsa draws a single walk; it takes no walk budget")


@dataclass(frozen=True)
class AcceptanceMode:
    """biased: accept RED with probability x_i and BLUE with 1-x_i.
    unbiased: accept with probability p regardless of color."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind == "biased":
            if self.p is not None:
                raise ValueError("biased mode takes no probability")
        elif self.kind == "unbiased":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("unbiased mode needs an acceptance probability in [0,1]")
        else:
            raise ValueError("mode must be 'biased' or 'unbiased'")


@dataclass(frozen=True)
class PolarizationEstimate:
    """Monte Carlo estimate of the conditional RED probability given
    acceptance, with a 95% normal-approximation interval."""

    p_red_given_accept: float
    p_red: float
    sample_count: int
    ci_halfwidth: float
    verdict: str  # polarizing | not-polarizing | inconclusive
    trials: int = 0
    probe_resamples: int = 0


def sample_bipartite_graph(
    params: GenerativeParams, rng: np.random.Generator
) -> BipartiteGraph:
    """Draw latent opinions i.i.d. from the catalog law, then each user-item
    edge independently: RED items with probability x_i k/n, BLUE with
    (1-x_i) k/n."""
    n, m, k = params.n, params.m, params.k
    x = params.distribution.sample(m, rng)
    rows = []
    lens = np.empty(m, dtype=np.int64)
    for i in range(m):
        nr = rng.binomial(n, x[i] * k / n)
        nb = rng.binomial(n, (1.0 - x[i]) * k / n)
        red = rng.choice(n, nr, replace=False)
        blue = n + rng.choice(n, nb, replace=False)
        items = np.concatenate([red, blue])
        items.sort()
        rows.append(items)
        lens[i] = items.size
    user_indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(lens, out=user_indptr[1:])
    user_items = np.concatenate(rows) if rows else np.zeros(0, np.int64)

    order = np.argsort(user_items, kind="stable")
    item_users = np.repeat(np.arange(m, dtype=np.int64), lens)[order]
    item_counts = np.bincount(user_items, minlength=2 * n)
    item_indptr = np.zeros(2 * n + 1, dtype=np.int64)
    np.cumsum(item_counts, out=item_indptr[1:])

    x.setflags(write=False)
    return BipartiteGraph(
        n=n,
        opinions=x,
        user_indptr=user_indptr,
        user_items=user_items,
        item_indptr=item_indptr,
        item_users=item_users,
        params=params,
    )


def plant_probe(
    graph: BipartiteGraph, x_i: float, rng: np.random.Generator
) -> tuple[ProbedGraph, int]:
    """Add a probe user with controlled opinion x_i, wired by the same edge
    rule the generator uses. An empty item draw is resampled; the number of
    resamples is returned for diagnostics."""
    if graph.params is None:
        raise ValueError("probe planting needs the graph's generative parameters")
    if not 0.0 <= x_i <= 1.0:
        raise ValueError("x_i must lie in [0,1]")
    n, k = graph.n, graph.params.k
    resamples = 0
    while True:
        nr = rng.binomial(n, x_i * k / n)
        nb = rng.binomial(n, (1.0 - x_i) * k / n)
        if nr + nb > 0:
            break
        resamples += 1
    red = rng.choice(n, nr, replace=False)
    blue = n + rng.choice(n, nb, replace=False)
    items = np.concatenate([red, blue])
    items.sort()
    degs = graph.item_degrees().astype(np.int64).copy()
    degs[items] += 1
    return ProbedGraph(base=graph, probe_items=items, item_degs=degs), resamples


def _gather_rows(indptr, flat, rows):
    """Concatenate CSR rows; returns (values, per-row lengths)."""
    lens = indptr[rows + 1] - indptr[rows]
    total = int(lens.sum())
    if total == 0:
        return flat[:0], lens
    offsets = np.repeat(indptr[rows + 1] - np.cumsum(lens), lens)
    return flat[offsets + np.arange(total)], lens


def _users_to_items(graph, user_vec: np.ndarray) -> np.ndarray:
    """One propagation pass: mass at each user spreads uniformly over the
    items it owns."""
    probe = isinstance(graph, ProbedGraph)
    base = graph.base if probe else graph
    support = np.flatnonzero(user_vec)
    out = np.zeros(graph.item_count)
    if support.size == 0:
        return out
    if probe and support[-1] == graph.probe_user:
        mass = user_vec[graph.probe_user]
        deg = graph.probe_items.size
        if deg == 0:
            raise ValueError(f"walk reaches user {graph.probe_user} with no items")
        out[graph.probe_items] += mass / deg
        support = support[:-1]
    if support.size:
        degs = np.diff(base.user_indptr)[support]
        if (degs == 0).any():
            bad = int(support[np.flatnonzero(degs == 0)[0]])
            raise ValueError(f"walk reaches user {bad} with no items")
        items, lens = _gather_rows(base.user_indptr, base.user_items, support)
        weights = np.repeat(user_vec[support] / degs, lens)
        out += np.bincount(items, weights=weights, minlength=graph.item_count)
    return out


def _items_to_users(graph, item_vec: np.ndarray) -> np.ndarray:
    """One propagation pass: mass at each item spreads uniformly over its
    owners (probe included when it owns the item)."""
    probe = isinstance(graph, ProbedGraph)
    base = graph.base if probe else graph
    support = np.flatnonzero(item_vec)
    out = np.zeros(graph.m)
    if support.size == 0:
        return out
    if probe:
        degs = graph.item_degs[support]
    else:
        degs = np.diff(base.item_indptr)[support]
    if (degs == 0).any():
        bad = int(support[np.flatnonzero(degs == 0)[0]])
        raise ValueError(f"walk reaches item {bad} with no owners")
    contrib = item_vec[support] / degs
    users, lens = _gather_rows(base.item_indptr, base.item_users, support)
    out[: base.m] = np.bincount(
        users, weights=np.repeat(contrib, lens), minlength=base.m
    )
    if probe:
        owned = graph.probe_items
        vals = item_vec[owned] / graph.item_degs[owned]
        out[graph.probe_user] = float(vals.sum())
    return out


def walk_distribution(graph, start: int, steps: int, side: str = "user") -> np.ndarray:
    """Exact endpoint distribution of a ``steps``-step uniform random walk
    from ``start`` (a user index, or an item index with side='item').

    Computed by sparse distribution-propagation passes; the result lives on
    the side the parity of ``steps`` dictates and sums to 1. A reachable
    degree-0 node is an error naming the node."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if side not in ("user", "item"):
        raise ValueError("side must be 'user' or 'item'")
    on_user_side = side == "user"
    if on_user_side:
        if not 0 <= start < graph.m:
            raise ValueError(f"user {start} out of range")
        if graph.user_degree(start) == 0:
            raise ValueError(f"user {start} has no items to walk to")
        vec = np.zeros(graph.m)
    else:
        if not 0 <= start < graph.item_count:
            raise ValueError(f"item {start} out of range")
        if graph.item_degree(start) == 0:
            raise ValueError(f"item {start} has no owners to walk to")
        vec = np.zeros(graph.item_count)
    vec[start] = 1.0
    for _ in range(steps):
        vec = _users_to_items(graph, vec) if on_user_side else _items_to_users(graph, vec)
        on_user_side = not on_user_side
    return vec


def _sample_walk_step_from_user(graph, user: int, rng) -> int:
    items = graph.items_of(user)
    if items.size == 0:
        raise ValueError(f"user {user} has no items to walk to")
    return int(items[rng.integers(items.size)])


def _sample_walk_step_from_item(graph, item: int, rng) -> int:
    deg = graph.item_degree(item)
    if deg == 0:
        raise ValueError(f"item {item} has no owners to walk to")
    pick = int(rng.integers(deg))
    owners = graph.users_of(item)
    return int(owners[pick])


def simple_salsa(graph, user: int, rng: np.random.Generator) -> int:
    """Recommend the endpoint of one sampled 3-step walk from the user
    (user -> item -> user -> item)."""
    j = _sample_walk_step_from_user(graph, user, rng)
    u = _sample_walk_step_from_item(graph, j, rng)
    return _sample_walk_step_from_user(graph, u, rng)


def simple_ppr(
    graph, user: int, config: RecommenderConfig, rng: np.random.Generator
) -> int:
    """Recommend the most-visited endpoint of 3-step walks from the user.

    Sampled mode counts ``t_walks`` walks; EXACT mode takes the argmax of the
    exact 3-step distribution (the infinite-walk limit). Lowest index wins
    ties."""
    if config.t_walks is None:
        dist = walk_distribution(graph, user, 3, side="user")
        return int(np.argmax(dist))
    counts = np.zeros(graph.item_count, dtype=np.int64)
    for _ in range(config.t_walks):
        counts[simple_salsa(graph, user, rng)] += 1
    return int(np.argmax(counts))


def simple_icf(
    graph, user: int, config: RecommenderConfig, rng: np.random.Generator
) -> int:
    """Pick one owned item uniformly as a seed, then recommend the
    most-visited endpoint of 2-step walks from the seed."""
    seed = _sample_walk_step_from_user(graph, user, rng)
    if config.t_walks is None:
        dist = walk_distribution(graph, seed, 2, side="item")
        return int(np.argmax(dist))
    counts = np.zeros(graph.item_count, dtype=np.int64)
    for _ in range(config.t_walks):
        u = _sample_walk_step_from_item(graph, seed, rng)
        counts[_sample_walk_step_from_user(graph, u, rng)] += 1
    return int(np.argmax(counts))


def recommend(graph, user: int, config: RecommenderConfig, rng) -> int:
    if config.algorithm == "salsa":
        return simple_salsa(graph, user, rng)
    if config.algorithm == "ppr":
        return simple_ppr(graph, user, config, rng)
    return simple_icf(graph, user, config, rng)


def acceptance_decision(
    user_opinion: float, item_is_red: bool, mode: AcceptanceMode, rng
) -> bool:
    """biased: accept RED with probability x_i, BLUE with 1-x_i.
    unbiased: accept with probability p regardless of color."""
    if not 0.0 <= user_opinion <= 1.0:
        raise ValueError("user opinion must lie in [0,1]")
    if mode.kind == "biased":
        p = user_opinion if item_is_red else 1.0 - user_opinion
    else:
        p = mode.p
    return bool(rng.random() < p)


def _verdict(p_hat: float, halfwidth: float, x_i: float, accepted: int) -> str:
    if accepted < 100 or x_i == 0.5:
        return "inconclusive"
    lo, hi = p_hat - halfwidth, p_hat + halfwidth
    if x_i > 0.5:
        if lo > x_i:
            return "polarizing"
        if hi < x_i:
            return "not-polarizing"
    else:
        if hi < x_i:
            return "polarizing"
        if lo > x_i:
            return "not-polarizing"
    return "inconclusive"


def estimate_polarization(
    params: GenerativeParams,
    config: RecommenderConfig,
    x_i: float,
    mode: AcceptanceMode,
    trials: int,
    rng: np.random.Generator,
    trials_per_graph: int = 1,
    record=None,
) -> PolarizationEstimate:
    """Monte Carlo estimate of P(recommended item was RED | accepted) for a
    planted probe with opinion x_i.

    Each trial plants a fresh probe, requests one recommendation, and applies
    the acceptance rule. Graphs are redrawn every ``trials_per_graph`` trials
    (default 1: a fresh graph per trial). ``record``, when given a list,
    receives one (trial, graph_index, item, is_red, accepted) tuple per trial.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0.0 < x_i < 1.0:
        raise ValueError("x_i must lie strictly inside (0,1)")
    if trials_per_graph < 1:
        raise ValueError("trials_per_graph must be at least 1")

    accepted = red_accepted = red_total = 0
    resamples = 0
    graph = None
    graph_index = -1
    for t in range(trials):
        if t % trials_per_graph == 0:
            graph = sample_bipartite_graph(params, rng.spawn(1)[0])
            graph_index += 1
        trial_rng = rng.spawn(1)[0]
        probed, rs = plant_probe(graph, x_i, trial_rng)
        resamples += rs
        item = recommend(probed, probed.probe_user, config, trial_rng)
        is_red = probed.is_red(item)
        red_total += is_red
        ok = acceptance_decision(x_i, is_red, mode, trial_rng)
        if ok:
            accepted += 1
            red_accepted += is_red
        if record is not None:
            record.append((t, graph_index, item, bool(is_red), ok))

    p_red = red_total / trials
    if accepted == 0:
        return PolarizationEstimate(
            p_red_given_accept=float("nan"),
            p_red=p_red,
            sample_count=0,
            ci_halfwidth=float("nan"),
            verdict="inconclusive",
            trials=trials,
            probe_resamples=resamples,
        )
    p_hat = red_accepted / accepted
    halfwidth = 1.96 * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / accepted)
    return PolarizationEstimate(
        p_red_given_accept=p_hat,
        p_red=p_red,
        sample_count=accepted,
        ci_halfwidth=halfwidth,
        verdict=_verdict(p_hat, halfwidth, x_i, accepted),
        trials=trials,
        probe_resamples=resamples,
    )


@dataclass(frozen=True)
class LimitingQuantity:
    """One empirical average with its predicted large-n value and a z-score
    from the per-entity sample spread.

    sample_mean/sample_var/sample_predicted describe the per-entity samples
    behind the average (users, items, or per-user pair counts), so reports
    from independent graphs can be pooled exactly."""

    empirical: float
    predicted: float
    z_score: float
    sample_count: int
    sample_mean: float
    sample_var: float
    sample_predicted: float


@dataclass(frozen=True)
class LimitingReport:
    user_degree: LimitingQuantity
    item_degree: LimitingQuantity
    same_color_coownership: LimitingQuantity
    cross_color_coownership: LimitingQuantity


def _quantity(samples: np.ndarray, predicted_sample_mean: float, scale: float,
              predicted: float) -> LimitingQuantity:
    count = samples.size
    mean = float(np.mean(samples))
    var = float(np.var(samples, ddof=1)) if count > 1 else 0.0
    se = math.sqrt(var / count) if count > 1 and var > 0 else float("inf")
    z = (mean - predicted_sample_mean) / se if math.isfinite(se) else 0.0
    return LimitingQuantity(
        empirical=mean * scale,
        predicted=predicted,
        z_score=z,
        sample_count=count,
        sample_mean=mean,
        sample_var=var,
        sample_predicted=predicted_sample_mean,
    )


def pool_quantities(quantities) -> LimitingQuantity:
    """Combine same-kind LimitingQuantity reports from independent graphs
    drawn with identical parameters into one pooled estimate."""
    qs = list(quantities)
    if not qs:
        raise ValueError("nothing to pool")
    total = sum(q.sample_count for q in qs)
    mean = sum(q.sample_count * q.sample_mean for q in qs) / total
    within = sum((q.sample_count - 1) * q.sample_var for q in qs)
    between = sum(q.sample_count * (q.sample_mean - mean) ** 2 for q in qs)
    var = (within + between) / (total - 1) if total > 1 else 0.0
    se = math.sqrt(var / total) if var > 0 else float("inf")
    z = (mean - qs[0].sample_predicted) / se if math.isfinite(se) else 0.0
    scale = qs[0].empirical / qs[0].sample_mean if qs[0].sample_mean else 1.0
    return LimitingQuantity(
        empirical=mean * scale,
        predicted=qs[0].predicted,
        z_score=z,
        sample_count=total,
        sample_mean=mean,
        sample_var=var,
        sample_predicted=qs[0].sample_predicted,
    )


def limiting_quantities(graph: BipartiteGraph) -> LimitingReport:
    """Empirical degree and co-ownership averages against their large-n
    limits: mean user degree -> k, mean item degree -> mk/2n, mean same-color
    pair co-ownership -> mk^2(1/4 + Var)/n^2, cross-color with -Var.

    Co-ownership means are aggregated from per-user owned-color counts
    (sum_u r_u(r_u - 1) over ordered same-color pairs, etc.), which avoids
    enumerating item pairs; z-scores come from the per-entity sample spread.
    """
    if graph.params is None:
        raise ValueError("limiting quantities need the graph's generative parameters")
    p = graph.params
    n, m, k = p.n, p.m, p.k
    var = p.distribution.variance

    udeg = graph.user_degrees().astype(np.float64)
    ideg = graph.item_degrees().astype(np.float64)

    red_counts = np.zeros(m)
    for u in range(m):
        items = graph.items_of(u)
        red_counts[u] = np.count_nonzero(items < n)
    blue_counts = udeg - red_counts

    # ordered same-color pairs per user: r(r-1) + b(b-1); cross: 2 r b
    same = red_counts * (red_counts - 1.0) + blue_counts * (blue_counts - 1.0)
    cross = 2.0 * red_counts * blue_counts

    pred_same_pair = m * k * k * (0.25 + var) / (n * n)
    pred_cross_pair = m * k * k * (0.25 - var) / (n * n)
    n_same_pairs = 2.0 * n * (n - 1.0)  # ordered, both colors
    n_cross_pairs = 2.0 * n * n

    return LimitingReport(
        user_degree=_quantity(udeg, k, 1.0, k),
        item_degree=_quantity(ideg, m * k / (2.0 * n), 1.0, m * k / (2.0 * n)),
        same_color_coownership=_quantity(
            same, pred_same_pair * n_same_pairs / m, m / n_same_pairs, pred_same_pair
        ),
        cross_color_coownership=_quantity(
            cross, pred_cross_pair * n_cross_pairs / m, m / n_cross_pairs, pred_cross_pair
        ),
    )
