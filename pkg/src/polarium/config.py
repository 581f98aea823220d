"""Experiment configuration: strict JSON parsing and validation.

Unknown keys are rejected, and validation reports every violation at once
rather than stopping at the first. A validated config is a canonical dict
with all defaults filled; anything that would break a module precondition
downstream is refused here, before compute starts.
"""

from __future__ import annotations

import json

EXPERIMENT_KINDS = ("single-agent", "dynamics", "two-island", "recsys", "theorem-suite")


class ConfigError(ValueError):
    """Carries the full list of validation errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class _Checker:
    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ConfigError(["config must be a JSON object"])
        self.data = dict(data)
        self.errors: list[str] = []
        self.out: dict = {}

    def take(self, key, default=None, required=False):
        if key in self.data:
            return self.data.pop(key)
        if required:
            self.errors.append(f"missing required key '{key}'")
            return None
        return default

    def number(self, key, default=None, required=False, lo=None, hi=None,
               lo_open=False, hi_open=False, integer=False):
        raw = self.take(key, default, required)
        if raw is None:
            if default is None and not required:
                return None
            if required:
                return None
            raw = default
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            self.errors.append(f"'{key}' must be a number, got {raw!r}")
            return None
        if integer and not float(raw).is_integer():
            self.errors.append(f"'{key}' must be an integer, got {raw!r}")
            return None
        val = int(raw) if integer else float(raw)
        if lo is not None and (val <= lo if lo_open else val < lo):
            op = ">" if lo_open else ">="
            self.errors.append(f"'{key}' must be {op} {lo}, got {raw!r}")
            return None
        if hi is not None and (val >= hi if hi_open else val > hi):
            op = "<" if hi_open else "<="
            self.errors.append(f"'{key}' must be {op} {hi}, got {raw!r}")
            return None
        self.out[key] = val
        return val

    def choice(self, key, options, default=None, required=False):
        raw = self.take(key, default, required)
        if raw is None:
            return None
        if raw not in options:
            self.errors.append(f"'{key}' must be one of {sorted(options)}, got {raw!r}")
            return None
        self.out[key] = raw
        return raw

    def finish(self):
        for key in sorted(self.data):
            self.errors.append(f"unknown key '{key}'")
        if self.errors:
            raise ConfigError(self.errors)
        return self.out


def _common(chk: _Checker):
    chk.number("seed", default=0, integer=True, lo=0)
    out = chk.take("out")
    if out is not None:
        if not isinstance(out, str):
            chk.errors.append("'out' must be a string path")
        else:
            chk.out["out"] = out


def _validate_single_agent(data: dict) -> dict:
    chk = _Checker(data)
    chk.number("w", default=1.0, lo=0.0)
    chk.number("s", required=True, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    chk.number("b", required=True, lo=0.0)
    x0 = chk.take("x0")
    sweep = chk.take("x0_sweep")
    if x0 is None and sweep is None:
        chk.errors.append("one of 'x0' or 'x0_sweep' is required")
    if x0 is not None and sweep is not None:
        chk.errors.append("'x0' and 'x0_sweep' are mutually exclusive")
    if x0 is not None:
        if not isinstance(x0, (int, float)) or isinstance(x0, bool) or not 0.0 <= x0 <= 1.0:
            chk.errors.append(f"'x0' must be a number in [0,1], got {x0!r}")
        else:
            chk.out["x0"] = float(x0)
    if sweep is not None:
        if not isinstance(sweep, dict):
            chk.errors.append("'x0_sweep' must be an object with lo, hi, points")
        else:
            sub = _Checker(sweep)
            lo = sub.number("lo", required=True, lo=0.0, hi=1.0)
            hi = sub.number("hi", required=True, lo=0.0, hi=1.0)
            sub.number("points", required=True, integer=True, lo=2)
            if lo is not None and hi is not None and not lo < hi:
                sub.errors.append("'x0_sweep.lo' must be below 'x0_sweep.hi'")
            try:
                chk.out["x0_sweep"] = sub.finish()
            except ConfigError as exc:
                chk.errors.extend(f"x0_sweep: {e}" for e in exc.errors)
    chk.number("tol", default=1e-13, lo=0.0, lo_open=True)
    chk.number("max_iters", default=10**6, integer=True, lo=1)
    _common(chk)
    return chk.finish()


def _validate_dynamics(data: dict) -> dict:
    chk = _Checker(data)
    graph = chk.take("graph", required=True)
    if graph is not None:
        err = None
        if not isinstance(graph, dict):
            err = "'graph' must be an object"
        elif "file" in graph:
            if set(graph) != {"file"} or not isinstance(graph["file"], str):
                err = "'graph.file' must be the only graph key and a string path"
        elif "edges" in graph:
            extra = set(graph) - {"edges", "self_weights"}
            if extra:
                err = f"unknown graph keys {sorted(extra)}"
            elif not isinstance(graph["edges"], list) or not all(
                isinstance(e, list) and len(e) == 3 for e in graph["edges"]
            ):
                err = "'graph.edges' must be a list of [i, j, w] triples"
        else:
            err = "'graph' needs either 'file' or 'edges'"
        if err:
            chk.errors.append(err)
        else:
            chk.out["graph"] = graph
    x0 = chk.take("x0", required=True)
    if x0 is not None:
        if x0 == "random":
            chk.out["x0"] = "random"
        elif isinstance(x0, (int, float)) and not isinstance(x0, bool):
            if 0.0 <= x0 <= 1.0:
                chk.out["x0"] = float(x0)
            else:
                chk.errors.append(f"'x0' must lie in [0,1], got {x0!r}")
        elif isinstance(x0, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0
        ):
            if all(0.0 <= v <= 1.0 for v in x0):
                chk.out["x0"] = [float(v) for v in x0]
            else:
                chk.errors.append("'x0' entries must lie in [0,1]")
        else:
            chk.errors.append("'x0' must be a number, a list of numbers, or \"random\"")
    bias = chk.take("bias", default=0.0)
    if isinstance(bias, (int, float)) and not isinstance(bias, bool):
        if bias >= 0:
            chk.out["bias"] = float(bias)
        else:
            chk.errors.append("'bias' must be nonnegative")
    elif isinstance(bias, list) and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in bias
    ):
        if all(v >= 0 for v in bias):
            chk.out["bias"] = [float(v) for v in bias]
        else:
            chk.errors.append("'bias' entries must be nonnegative")
    else:
        chk.errors.append("'bias' must be a number or a list of numbers")
    chk.number("tol", default=1e-10, lo=0.0, lo_open=True)
    chk.number("max_iters", default=10**6, integer=True, lo=1)
    chk.number("record_every", default=1, integer=True, lo=1)
    _common(chk)
    return chk.finish()


def _validate_two_island(data: dict) -> dict:
    chk = _Checker(data)
    n = chk.number("n", required=True, integer=True, lo=1)
    chk.number("n2", default=None, integer=True, lo=1)
    ps = chk.number("ps", required=True, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    pd = chk.number("pd", required=True, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    if ps is not None and pd is not None and not ps > pd:
        chk.errors.append(
            "homophily requires 'ps' > 'pd' (within-island links denser than cross-island)"
        )
    if n is not None and ps is not None and pd is not None and ps > pd:
        n2 = chk.out.get("n2", n)
        for label, value in (("n*ps", n * ps), ("n2*ps", n2 * ps),
                             ("n*pd", n * pd), ("n2*pd", n2 * pd)):
            if abs(value - round(value)) > 1e-9:
                chk.errors.append(f"degree target {label} = {value} is not an integer")
    b = chk.number("b", required=True, lo=0.0, lo_open=True)
    x0 = chk.number("x0", default=0.7, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    if x0 is not None and x0 == 0.5:
        chk.errors.append("'x0' must differ from 1/2 (the symmetric fixed point)")
    chk.number("tol", default=1e-10, lo=0.0, lo_open=True)
    chk.number("max_iters", default=10**6, integer=True, lo=1)
    chk.number("record_every", default=1, integer=True, lo=1)
    chk.number("shuffle_swaps", default=0, integer=True, lo=0)
    _common(chk)
    return chk.finish()


def _validate_recsys(data: dict) -> dict:
    chk = _Checker(data)
    algo = chk.choice("algo", ("salsa", "ppr", "icf"), required=True)
    n = chk.number("n", required=True, integer=True, lo=1)
    m = chk.number("m", default=None, integer=True, lo=1)
    if m is None and n is not None and "m" not in chk.out:
        chk.out["m"] = 2 * n
    k = chk.number("k", required=True, lo=0.0, lo_open=True)
    if k is not None and n is not None and not k < n:
        chk.errors.append(f"'k' must be below 'n', got k={k}, n={n}")
    dist = chk.take("dist", default="uniform")
    if isinstance(dist, str):
        kind, _, arg = dist.partition(":")
        if kind == "uniform" and not arg:
            chk.out["dist"] = "uniform"
        elif kind in ("beta", "twopoint"):
            try:
                float(arg)
                chk.out["dist"] = dist
            except ValueError:
                chk.errors.append(f"'dist' parameter must be numeric, got {dist!r}")
        else:
            chk.errors.append(
                f"'dist' must be uniform, beta:<alpha>, or twopoint:<delta>, got {dist!r}"
            )
    else:
        chk.errors.append("'dist' must be a string")
    chk.number("xi", required=True, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    mode = chk.take("mode", default="biased")
    if isinstance(mode, str):
        kind, _, arg = mode.partition(":")
        if kind == "biased" and not arg:
            chk.out["mode"] = "biased"
        elif kind == "unbiased":
            try:
                p = float(arg)
                if 0.0 <= p <= 1.0:
                    chk.out["mode"] = mode
                else:
                    chk.errors.append("'mode' unbiased probability must lie in [0,1]")
            except ValueError:
                chk.errors.append(f"'mode' must be biased or unbiased:<p>, got {mode!r}")
        else:
            chk.errors.append(f"'mode' must be biased or unbiased:<p>, got {mode!r}")
    else:
        chk.errors.append("'mode' must be a string")
    chk.number("trials", required=True, integer=True, lo=1)
    walks = chk.take("T", default="exact")
    if walks == "exact":
        chk.out["T"] = "exact"
    elif isinstance(walks, (int, float)) and not isinstance(walks, bool) and float(walks).is_integer() and walks >= 1:
        chk.out["T"] = int(walks)
    else:
        chk.errors.append(f"'T' must be \"exact\" or a positive integer, got {walks!r}")
    if algo == "salsa" and chk.out.get("T", "exact") != "exact":
        chk.errors.append("'T' does not apply to salsa (it draws a single walk)")
    chk.number("trials_per_graph", default=1, integer=True, lo=1)
    _common(chk)
    return chk.finish()


def _validate_theorem_suite(data: dict) -> dict:
    chk = _Checker(data)
    chk.number("ndi_trials", default=10000, integer=True, lo=1)
    chk.number("flocking_trials", default=10000, integer=True, lo=1)
    chk.number("majorization_trials", default=10000, integer=True, lo=1)
    chk.number("reduction_trials", default=10000, integer=True, lo=1)
    chk.number("counterexample_max_trials", default=100000, integer=True, lo=1)
    chk.number("max_n", default=50, integer=True, lo=2)
    _common(chk)
    return chk.finish()


_VALIDATORS = {
    "single-agent": _validate_single_agent,
    "dynamics": _validate_dynamics,
    "two-island": _validate_two_island,
    "recsys": _validate_recsys,
    "theorem-suite": _validate_theorem_suite,
}


def validate_config(kind: str, data: dict) -> dict:
    """Validate a raw config dict for the given experiment kind. Returns the
    canonical config with defaults filled, or raises ConfigError listing
    every violation."""
    if kind not in _VALIDATORS:
        raise ConfigError([f"unknown experiment kind '{kind}'"])
    data = dict(data)
    declared = data.pop("kind", None)
    if declared is not None and declared != kind:
        raise ConfigError([f"config declares kind '{declared}' but '{kind}' was requested"])
    return _VALIDATORS[kind](data)


def parse_config(text: str, kind: str | None = None) -> dict:
    """Parse JSON config text and validate it. The experiment kind comes from
    the 'kind' key unless given explicitly."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    if kind is None:
        kind = data.get("kind")
        if kind is None:
            raise ConfigError(["config needs a 'kind' key when none is given"])
    return validate_config(kind, data)
