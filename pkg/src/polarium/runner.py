"""Experiment orchestration: dispatch a validated config to its family
runner, emit CSV/JSON results and figures, and record a manifest.

Every stochastic path is a deterministic function of (config, seed): one root
seed derives named substreams per component, so rerunning a config reproduces
every output byte for byte, and growing one component's trial count never
perturbs another's draws.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import plotting
from .config import validate_config
from .dynamics import (
    BiasProfile,
    ConvergenceSpec,
    EnvironmentParams,
    OpinionState,
    run_single_agent,
    run_until_convergence,
)
from .graph import WeightedGraph, read_edge_list
from .metrics import divergence_report, is_polarizing
from .recsys import (
    AcceptanceMode,
    GenerativeParams,
    OpinionDistribution,
    RecommenderConfig,
    estimate_polarization,
)
from .reporting import sha256_file, write_csv, write_json
from .suites import (
    find_gdi_counterexample,
    flocking_majorization_suite,
    gdi_flocking_suite,
    ndi_monotone_suite,
    zero_bias_reduction_suite,
)
from .two_island import TwoIslandParams, build_two_island, classify_regime

__all__ = ["RunManifest", "run_experiment", "substream"]

# substream component tags (theorem suites use 10..14)
_INITIAL, _TRIALS, _SHUFFLE = 1, 2, 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Named child stream of the root seed; stable under adding siblings."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass(frozen=True)
class RunManifest:
    kind: str
    config: dict
    code_version: str
    duration_seconds: float
    outputs: dict  # file name -> sha256

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "code_version": self.code_version,
            "duration_seconds": self.duration_seconds,
            "outputs": self.outputs,
        }


def _trajectory_rows(times, states):
    for t, vec in zip(times, states):
        for node, value in enumerate(vec):
            yield (t, node, float(value))


def _metric_rows(graph, times, states):
    for t, vec in zip(times, states):
        rep = divergence_report(graph, OpinionState(vec, t))
        yield (t, rep.ndi, rep.gdi)


def _run_dynamics_family(graph: WeightedGraph, initial: OpinionState,
                         biases: BiasProfile, cfg: dict, out_dir: str,
                         islands=None, extra_summary_fn=None, predicted=None):
    spec = ConvergenceSpec(tolerance=cfg["tol"], max_iters=cfg["max_iters"])
    traj = run_until_convergence(graph, initial, biases, spec,
                                 record_every=cfg["record_every"])
    write_csv(os.path.join(out_dir, "trajectory.csv"), ["t", "node", "opinion"],
              _trajectory_rows(traj.times, traj.states))
    metric_rows = list(_metric_rows(graph, traj.times, traj.states))
    write_csv(os.path.join(out_dir, "metrics.csv"), ["t", "ndi", "gdi"], metric_rows)

    summary = {
        "converged": traj.converged,
        "iterations": traj.iterations,
        "final_opinions": [float(v) for v in traj.final_state.opinions],
        "degeneracy_flags": traj.degenerate_nodes,
        "ndi_initial": metric_rows[0][1],
        "ndi_final": metric_rows[-1][1],
        "gdi_initial": metric_rows[0][2],
        "gdi_final": metric_rows[-1][2],
        "polarizing": is_polarizing(graph, initial, traj.final_state),
    }
    if extra_summary_fn is not None:
        summary.update(extra_summary_fn(traj))
    write_json(os.path.join(out_dir, "summary.json"), summary)
    plotting.trajectory_figure(traj.times, traj.states,
                               os.path.join(out_dir, "trajectories.png"),
                               islands=islands, predicted=predicted)
    plotting.metrics_figure([r[0] for r in metric_rows],
                            [r[1] for r in metric_rows],
                            [r[2] for r in metric_rows],
                            os.path.join(out_dir, "metrics.png"))
    return traj, summary


def _run_dynamics(cfg: dict, out_dir: str, seed: int):
    gspec = cfg["graph"]
    if "file" in gspec:
        graph = read_edge_list(gspec["file"])
    else:
        selfs = gspec.get("self_weights")
        graph = WeightedGraph.from_edges(
            [(int(i), int(j), float(w)) for i, j, w in gspec["edges"]],
            self_weights={int(k): float(v) for k, v in selfs.items()} if selfs else None,
        )
    x0 = cfg["x0"]
    if x0 == "random":
        opinions = substream(seed, _INITIAL).random(graph.node_count)
    elif isinstance(x0, float):
        opinions = np.full(graph.node_count, x0)
    else:
        if len(x0) != graph.node_count:
            raise ValueError(
                f"x0 has {len(x0)} entries, graph has {graph.node_count} nodes"
            )
        opinions = np.asarray(x0, dtype=np.float64)
    bias = cfg["bias"]
    if isinstance(bias, float):
        biases = BiasProfile.uniform(graph.node_count, bias)
    else:
        if len(bias) != graph.node_count:
            raise ValueError(
                f"bias has {len(bias)} entries, graph has {graph.node_count} nodes"
            )
        biases = BiasProfile(np.asarray(bias, dtype=np.float64))
    _run_dynamics_family(graph, OpinionState(opinions), biases, cfg, out_dir)


def _run_two_island(cfg: dict, out_dir: str, seed: int):
    n1 = cfg["n"]
    n2 = cfg.get("n2", n1)
    params = TwoIslandParams(n1=n1, n2=n2, p_s=cfg["ps"], p_d=cfg["pd"])
    rng = substream(seed, _SHUFFLE) if cfg["shuffle_swaps"] else None
    net = build_two_island(params, rng=rng, shuffle_swaps=cfg["shuffle_swaps"])
    b, x0 = cfg["b"], cfg["x0"]

    opinions = np.where(net.islands == 0, x0, 1.0 - x0)
    initial = OpinionState(opinions)
    biases = BiasProfile.uniform(net.graph.node_count, b)

    h = params.homophily
    if n1 == n2:
        verdict = classify_regime(b, h)
        if x0 > 0.5:
            limits = verdict.predicted_limit
        else:  # islands swap roles under the mirror symmetry
            limits = (verdict.predicted_limit[1], verdict.predicted_limit[0])
        regime_summary = {
            "regime": verdict.regime,
            "predicted_limits": list(limits),
            "x_hat": verdict.x_hat,
        }
        predicted = limits
    else:
        regime_summary = {
            "regime": "no-prediction",
            "predicted_limits": None,
            "x_hat": None,
            "note": "island sizes differ; the regime theory assumes equal islands",
        }
        predicted = None

    def finish(traj):
        v1 = traj.final_state.opinions[net.islands == 0]
        v2 = traj.final_state.opinions[net.islands == 1]
        observed = [float(np.mean(v1)), float(np.mean(v2))]
        extra = {
            "homophily": h,
            "observed_limits": observed,
            "island_spread": [float(np.ptp(v1)), float(np.ptp(v2))],
        }
        if regime_summary["predicted_limits"] is not None:
            extra["max_limit_error"] = max(
                abs(observed[0] - regime_summary["predicted_limits"][0]),
                abs(observed[1] - regime_summary["predicted_limits"][1]),
            )
        extra.update(regime_summary)
        return extra

    _run_dynamics_family(net.graph, initial, biases, cfg, out_dir,
                         islands=net.islands, extra_summary_fn=finish,
                         predicted=predicted)


def _run_single_agent(cfg: dict, out_dir: str, seed: int):
    params = EnvironmentParams(self_weight=cfg["w"], env_opinion=cfg["s"], bias=cfg["b"])
    spec = ConvergenceSpec(tolerance=cfg["tol"], max_iters=cfg["max_iters"])
    threshold = None
    if cfg["b"] != 1.0:
        from .dynamics import polarization_threshold

        threshold = polarization_threshold(cfg["s"], cfg["b"])

    if "x0_sweep" in cfg:
        sweep = cfg["x0_sweep"]
        x0s = list(np.linspace(sweep["lo"], sweep["hi"], sweep["points"]))
    else:
        x0s = [cfg["x0"]]

    runs = [(x0, run_single_agent(params, x0, spec)) for x0 in x0s]
    rows = []
    for x0, run in runs:
        rows.extend((float(x0), t, float(x)) for t, x in enumerate(run.xs))
    write_csv(os.path.join(out_dir, "trajectory.csv"), ["x0", "t", "opinion"], rows)

    empirical = None
    if cfg["b"] > 1.0 and len(runs) > 1:
        # outcomes are monotone in x0: refine the 0/1 boundary by bisection
        finals = [run.final for _, run in runs]
        ups = [final > 0.5 for final in finals]
        if ups[0] or not ups[-1]:
            empirical = sweep["lo"] if ups[0] else sweep["hi"]
        else:
            lo = max(x0 for x0, up in zip(x0s, ups) if not up)
            hi = min(x0 for x0, up in zip(x0s, ups) if up)
            while hi - lo > 1e-9:
                mid = 0.5 * (lo + hi)
                if run_single_agent(params, mid, spec).final > 0.5:
                    hi = mid
                else:
                    lo = mid
            empirical = 0.5 * (lo + hi)

    summary = {
        "analytic_threshold": threshold,
        "empirical_threshold": empirical,
        "runs": [
            {
                "x0": float(x0),
                "final": run.final,
                "converged": run.converged,
                "iterations": run.iterations,
            }
            for x0, run in runs
        ],
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    keep = runs if len(runs) <= 8 else runs[:: max(1, len(runs) // 8)]
    plotting.single_agent_figure(
        [(x0, run.xs) for x0, run in keep], threshold,
        os.path.join(out_dir, "trajectories.png"),
    )


def _parse_dist(spec: str) -> OpinionDistribution:
    kind, _, arg = spec.partition(":")
    if kind == "uniform":
        return OpinionDistribution("uniform")
    return OpinionDistribution(kind, float(arg))


def _parse_mode(spec: str) -> AcceptanceMode:
    kind, _, arg = spec.partition(":")
    if kind == "biased":
        return AcceptanceMode("biased")
    return AcceptanceMode("unbiased", float(arg))


def _run_recsys(cfg: dict, out_dir: str, seed: int):
    params = GenerativeParams(
        n=cfg["n"], m=cfg["m"], k=cfg["k"], distribution=_parse_dist(cfg["dist"])
    )
    rec = RecommenderConfig(
        algorithm=cfg["algo"],
        t_walks=None if cfg["T"] == "exact" else cfg["T"],
    )
    mode = _parse_mode(cfg["mode"])
    records: list = []
    estimate = estimate_polarization(
        params, rec, cfg["xi"], mode, cfg["trials"], substream(seed, _TRIALS),
        trials_per_graph=cfg["trials_per_graph"], record=records,
    )
    write_csv(
        os.path.join(out_dir, "trials.csv"),
        ["trial", "graph_index", "item", "color", "accepted"],
        ((t, g, i, "RED" if r else "BLUE", a) for t, g, i, r, a in records),
    )
    summary = {
        "algorithm": cfg["algo"],
        "xi": cfg["xi"],
        "mode": cfg["mode"],
        "p_red_given_accept": estimate.p_red_given_accept,
        "p_red": estimate.p_red,
        "sample_count": estimate.sample_count,
        "ci_halfwidth": estimate.ci_halfwidth,
        "verdict": estimate.verdict,
        "trials": estimate.trials,
        "probe_resamples": estimate.probe_resamples,
        "opinion_variance": params.distribution.variance,
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    plotting.estimate_figure(
        estimate.p_red_given_accept if estimate.sample_count else 0.0,
        estimate.ci_halfwidth if estimate.sample_count else 0.0,
        estimate.p_red, cfg["xi"], os.path.join(out_dir, "estimate.png"),
    )


def _run_theorem_suite(cfg: dict, out_dir: str, seed: int):
    max_n = cfg["max_n"]
    results = {
        "ndi-monotone-averaging": ndi_monotone_suite(
            cfg["ndi_trials"], substream(seed, 10), max_n=max_n),
        "gdi-monotone-flocking": gdi_flocking_suite(
            cfg["flocking_trials"], substream(seed, 11), max_n=max_n),
        "flocking-majorization": flocking_majorization_suite(
            cfg["majorization_trials"], substream(seed, 12), max_n=max_n),
        "zero-bias-reduction": zero_bias_reduction_suite(
            cfg["reduction_trials"], substream(seed, 13)),
    }
    counter = find_gdi_counterexample(cfg["counterexample_max_trials"], substream(seed, 14))

    rows = [
        (name, res.trials, res.violations, res.worst_excess)
        for name, res in results.items()
    ]
    write_csv(os.path.join(out_dir, "suites.csv"),
              ["suite", "trials", "violations", "worst_excess"], rows)
    summary = {
        "suites": {
            name: {"trials": r.trials, "violations": r.violations, "passed": r.passed}
            for name, r in results.items()
        },
        "gdi_counterexample": {
            "found": counter.found,
            "trials_used": counter.trials_used,
            "gdi_before": counter.gdi_before,
            "gdi_after": counter.gdi_after,
            "edges": counter.edges,
            "self_weights": counter.self_weights,
            "state": counter.state,
        },
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    names = [r[0] for r in rows] + ["gdi-counterexample-found"]
    violations = [r[2] for r in rows] + [0 if counter.found else 1]
    trials = [r[1] for r in rows] + [counter.trials_used]
    plotting.suite_figure(names, violations, trials,
                          os.path.join(out_dir, "suites.png"))


_RUNNERS = {
    "single-agent": _run_single_agent,
    "dynamics": _run_dynamics,
    "two-island": _run_two_island,
    "recsys": _run_recsys,
    "theorem-suite": _run_theorem_suite,
}


def run_experiment(kind: str, config: dict, out_dir=None, seed=None) -> RunManifest:
    """Validate, run, and emit one experiment. ``out_dir`` and ``seed``
    override the config's values; the effective values are echoed in the
    manifest. Identical (config, seed) pairs produce identical outputs."""
    cfg = validate_config(kind, config)
    if seed is not None:
        cfg["seed"] = int(seed)
    if out_dir is not None:
        cfg["out"] = str(out_dir)
    cfg.setdefault("out", os.path.join("polarium-out", kind))
    target = cfg["out"]
    os.makedirs(target, exist_ok=True)

    started = time.perf_counter()
    _RUNNERS[kind](cfg, target, cfg["seed"])
    duration = time.perf_counter() - started

    outputs = {}
    for name in sorted(os.listdir(target)):
        if name == "manifest.json":
            continue
        path = os.path.join(target, name)
        if os.path.isfile(path):
            outputs[name] = sha256_file(path)
    manifest = RunManifest(
        kind=kind,
        config={k: v for k, v in cfg.items() if k != "out"},
        code_version=__version__,
        duration_seconds=duration,
        outputs=outputs,
    )
    write_json(os.path.join(target, "manifest.json"), manifest.to_dict())
    return manifest
