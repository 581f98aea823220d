import json

import numpy as np
import pytest

from polarium.cli import main
from polarium.config import ConfigError
from polarium.runner import run_experiment, substream


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


class TestSubstreams:
    def test_named_streams_are_stable_and_distinct(self):
        a = substream(7, 1).random(4)
        b = substream(7, 1).random(4)
        c = substream(7, 2).random(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestRunnerFamilies:
    def test_two_island_outputs(self, tmp_path):
        out = tmp_path / "ti"
        manifest = run_experiment(
            "two-island", {"n": 10, "ps": 0.4, "pd": 0.2, "b": 1.0, "x0": 0.7},
            out_dir=out, seed=1)
        assert set(manifest.outputs) == {
            "trajectory.csv", "metrics.csv", "summary.json",
            "trajectories.png", "metrics.png"}
        summary = read_json(out / "summary.json")
        assert summary["regime"] == "polarization"
        assert summary["polarizing"] is True
        assert max(abs(a - b) for a, b in
                   zip(summary["observed_limits"], [1.0, 0.0])) < 1e-6

    def test_two_island_mirrored_start(self, tmp_path):
        manifest = run_experiment(
            "two-island", {"n": 10, "ps": 0.4, "pd": 0.2, "b": 1.0, "x0": 0.3},
            out_dir=tmp_path / "m", seed=1)
        summary = read_json(tmp_path / "m" / "summary.json")
        assert summary["predicted_limits"] == [0.0, 1.0]

    def test_two_island_unequal_islands_no_prediction(self, tmp_path):
        manifest = run_experiment(
            "two-island",
            {"n": 10, "n2": 20, "ps": 0.4, "pd": 0.2, "b": 1.0, "x0": 0.7},
            out_dir=tmp_path / "u", seed=1)
        summary = read_json(tmp_path / "u" / "summary.json")
        assert summary["regime"] == "no-prediction"

    def test_single_agent_sweep_threshold(self, tmp_path):
        out = tmp_path / "sa"
        run_experiment("single-agent", {
            "s": 1.0 / 3.0, "b": 2.0,
            "x0_sweep": {"lo": 0.05, "hi": 0.95, "points": 10}},
            out_dir=out, seed=0)
        summary = read_json(out / "summary.json")
        assert abs(summary["analytic_threshold"] - 2.0 / 3.0) < 1e-12
        assert abs(summary["empirical_threshold"] - 2.0 / 3.0) < 1e-6

    def test_dynamics_metrics_schema(self, tmp_path):
        out = tmp_path / "dy"
        run_experiment("dynamics", {
            "graph": {"edges": [[0, 1, 1.0], [1, 2, 1.0]],
                      "self_weights": {"0": 1.0, "1": 1.0, "2": 1.0}},
            "x0": [0.0, 0.5, 1.0], "bias": 0.0}, out_dir=out, seed=0)
        lines = (out / "metrics.csv").read_text().splitlines()
        assert lines[0] == "t,ndi,gdi"
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,node,opinion"
        summary = read_json(out / "summary.json")
        assert summary["converged"] is True
        assert summary["polarizing"] is False

    def test_dynamics_graph_file(self, tmp_path):
        gfile = tmp_path / "g.txt"
        gfile.write_text("0 1 1.0\nself 0 2.0\nself 1 2.0\n")
        out = tmp_path / "dyf"
        run_experiment("dynamics", {"graph": {"file": str(gfile)}, "x0": 0.25},
                       out_dir=out, seed=0)
        assert (out / "summary.json").exists()

    def test_recsys_outputs(self, tmp_path):
        out = tmp_path / "rs"
        manifest = run_experiment("recsys", {
            "algo": "salsa", "n": 40, "k": 8.0, "xi": 0.75, "trials": 60,
            "trials_per_graph": 20}, out_dir=out, seed=5)
        assert set(manifest.outputs) == {"trials.csv", "summary.json", "estimate.png"}
        rows = (out / "trials.csv").read_text().splitlines()
        assert rows[0] == "trial,graph_index,item,color,accepted"
        assert len(rows) == 61
        summary = read_json(out / "summary.json")
        assert 0.0 <= summary["p_red"] <= 1.0

    def test_theorem_suite_outputs(self, tmp_path):
        out = tmp_path / "th"
        run_experiment("theorem-suite", {
            "ndi_trials": 100, "flocking_trials": 100, "majorization_trials": 100,
            "reduction_trials": 50, "counterexample_max_trials": 20000,
            "max_n": 20}, out_dir=out, seed=2)
        summary = read_json(out / "summary.json")
        assert all(s["passed"] for s in summary["suites"].values())
        assert summary["gdi_counterexample"]["found"] is True

    def test_validation_errors_surface(self, tmp_path):
        with pytest.raises(ConfigError):
            run_experiment("two-island", {"n": 10, "ps": 0.1, "pd": 0.2, "b": 1.0},
                           out_dir=tmp_path / "x", seed=0)

    def test_manifest_checksums_cover_outputs(self, tmp_path):
        out = tmp_path / "mf"
        manifest = run_experiment(
            "two-island", {"n": 10, "ps": 0.4, "pd": 0.2, "b": 1.0},
            out_dir=out, seed=3)
        manifest_file = read_json(out / "manifest.json")
        assert manifest_file["outputs"] == manifest.outputs
        assert manifest_file["code_version"] == manifest.code_version
        assert "manifest.json" not in manifest.outputs
        names = {p.name for p in out.iterdir()}
        assert names == set(manifest.outputs) | {"manifest.json"}


class TestCli:
    def test_two_island_flags(self, tmp_path, capsys):
        out = tmp_path / "cli"
        code = main(["two-island", "--n", "10", "--ps", "0.4", "--pd", "0.2",
                     "--b", "1.0", "--x0", "0.7", "--seed", "4",
                     "--out", str(out)])
        assert code == 0
        assert (out / "summary.json").exists()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 10, "ps": 0.4, "pd": 0.2, "b": 0.1}))
        out = tmp_path / "o"
        code = main(["two-island", "--config", str(cfg), "--b", "1.5",
                     "--out", str(out), "--seed", "0"])
        assert code == 0
        assert read_json(out / "summary.json")["regime"] == "polarization"

    def test_validation_error_exit_code(self, tmp_path, capsys):
        code = main(["two-island", "--n", "10", "--ps", "0.1", "--pd", "0.2",
                     "--b", "1.0", "--out", str(tmp_path / "v")])
        assert code == 1
        assert "homophily" in capsys.readouterr().err

    def test_unknown_key_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"n": 10, "ps": 0.4, "pd": 0.2, "b": 1.0, "pd_": 0.2}')
        code = main(["two-island", "--config", str(cfg), "--out", str(tmp_path / "u")])
        assert code == 1
        assert "pd_" in capsys.readouterr().err

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        code = main(["dynamics", "--graph-file", str(tmp_path / "missing.txt"),
                     "--x0", "0.5", "--out", str(tmp_path / "r")])
        assert code == 2

    def test_bad_flags_exit_code(self):
        assert main(["two-island", "--nope"]) == 1

    def test_env_var_overrides_out_dir(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "env-out"
        monkeypatch.setenv("POLARIUM_OUT", str(env_dir))
        code = main(["two-island", "--n", "10", "--ps", "0.4", "--pd", "0.2",
                     "--b", "1.0", "--out", str(tmp_path / "ignored")])
        assert code == 0
        assert (env_dir / "summary.json").exists()
        assert not (tmp_path / "ignored").exists()
