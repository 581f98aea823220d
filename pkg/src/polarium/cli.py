"""Command-line experiment runner.

    polarium <subcommand> [--config FILE] [--seed N] [--out DIR] [flags...]

Subcommands: single-agent, dynamics, two-island, recsys, theorem-suite.
Direct flags override config-file values. The POLARIUM_OUT environment
variable overrides the output directory. Exit codes: 0 success, 1 validation
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError
from .runner import run_experiment

__all__ = ["main", "build_parser"]


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--seed", type=int, help="root seed (overrides config)")
    sub.add_argument("--out", help="output directory (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarium", description=__doc__)
    subs = parser.add_subparsers(dest="kind", required=True)

    sub = subs.add_parser("single-agent", help="one agent against a fixed environment")
    _add_common(sub)
    sub.add_argument("--w", type=float, help="self-weight")
    sub.add_argument("--s", type=float, help="environment opinion in (0,1)")
    sub.add_argument("--b", type=float, help="bias exponent")
    sub.add_argument("--x0", type=float, help="initial opinion")
    sub.add_argument("--tol", type=float)
    sub.add_argument("--max-iters", type=int, dest="max_iters")

    sub = subs.add_parser("dynamics", help="biased dynamics on an arbitrary graph")
    _add_common(sub)
    sub.add_argument("--graph-file", dest="graph_file", help="edge-list file")
    sub.add_argument("--x0", help="number, or 'random'")
    sub.add_argument("--bias", type=float)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--max-iters", type=int, dest="max_iters")
    sub.add_argument("--record-every", type=int, dest="record_every")

    sub = subs.add_parser("two-island", help="two-island regime experiment")
    _add_common(sub)
    sub.add_argument("--n", type=int, help="nodes per island")
    sub.add_argument("--ps", type=float, help="within-island link density")
    sub.add_argument("--pd", type=float, help="cross-island link density")
    sub.add_argument("--b", type=float, help="bias exponent")
    sub.add_argument("--x0", type=float, help="island-1 initial opinion")
    sub.add_argument("--tol", type=float)
    sub.add_argument("--max-iters", type=int, dest="max_iters")

    sub = subs.add_parser("recsys", help="recommender polarization estimate")
    _add_common(sub)
    sub.add_argument("--algo", choices=("salsa", "ppr", "icf"))
    sub.add_argument("--n", type=int, help="items per color")
    sub.add_argument("--m", type=int, help="users (default 2n)")
    sub.add_argument("--k", type=float, help="expected books per user")
    sub.add_argument("--dist", help="uniform | beta:<alpha> | twopoint:<delta>")
    sub.add_argument("--xi", type=float, help="probe opinion")
    sub.add_argument("--mode", help="biased | unbiased:<p>")
    sub.add_argument("--trials", type=int)
    sub.add_argument("--T", dest="T", help="walk budget: integer or 'exact'")
    sub.add_argument("--trials-per-graph", type=int, dest="trials_per_graph")

    sub = subs.add_parser("theorem-suite", help="randomized invariant suites")
    _add_common(sub)
    sub.add_argument("--ndi-trials", type=int, dest="ndi_trials")
    sub.add_argument("--flocking-trials", type=int, dest="flocking_trials")
    sub.add_argument("--majorization-trials", type=int, dest="majorization_trials")
    sub.add_argument("--reduction-trials", type=int, dest="reduction_trials")
    sub.add_argument("--counterexample-max-trials", type=int,
                     dest="counterexample_max_trials")
    sub.add_argument("--max-n", type=int, dest="max_n")

    return parser


_FLAG_KEYS = {
    "single-agent": ("w", "s", "b", "x0", "tol", "max_iters"),
    "dynamics": ("x0", "bias", "tol", "max_iters", "record_every"),
    "two-island": ("n", "ps", "pd", "b", "x0", "tol", "max_iters"),
    "recsys": ("algo", "n", "m", "k", "dist", "xi", "mode", "trials", "T",
               "trials_per_graph"),
    "theorem-suite": ("ndi_trials", "flocking_trials", "majorization_trials",
                      "reduction_trials", "counterexample_max_trials", "max_n"),
}


def _merge_config(args) -> dict:
    data: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"config is not valid JSON: {exc}"]) from None
        if not isinstance(data, dict):
            raise ConfigError(["config must be a JSON object"])
    for key in _FLAG_KEYS[args.kind]:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.kind == "dynamics" and getattr(args, "graph_file", None):
        data["graph"] = {"file": args.graph_file}
    if args.kind == "dynamics" and isinstance(data.get("x0"), str) and data["x0"] != "random":
        try:
            data["x0"] = float(data["x0"])
        except ValueError:
            pass  # let validation name the problem
    if args.kind == "recsys" and isinstance(data.get("T"), str) and data["T"] != "exact":
        try:
            data["T"] = int(data["T"])
        except ValueError:
            pass
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["out"] = args.out
    env_out = os.environ.get("POLARIUM_OUT")
    if env_out:
        data["out"] = env_out
    return data


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        data = _merge_config(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        manifest = run_experiment(args.kind, data)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"error [{args.kind}]: {exc}", file=sys.stderr)
        return 2
    out = data.get("out") or os.path.join("polarium-out", args.kind)
    print(f"{args.kind}: wrote {len(manifest.outputs)} outputs to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
