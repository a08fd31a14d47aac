"""CLI surface: report shape, exit codes, artifacts on disk.

Numerical correctness of the routes is covered by the module and
acceptance suites; here the subject is the plumbing (JSON contract, route
refusal vs failure, CSV/figure output, self-test wiring), so path counts
stay small.
"""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from ruinops.cli import main

CLASSICAL = {
    "premium": {"family": "Constant", "c": 1.0},
    "claims": {"family": "Exponential", "mu": 2.0},
    "interclaims": {"family": "Exponential", "lambda": 1.0},
    "delta": 0.0,
    "penalty": {"family": "RuinIndicator"},
    "u_max": 5.0,
}

LINEAR_DISCOUNTED = {
    "premium": {"family": "Linear", "c": 1.0, "eps": 0.5},
    "claims": {"family": "Exponential", "mu": 2.0},
    "interclaims": {"family": "Exponential", "lambda": 1.0},
    "delta": 0.5,
    "penalty": {"family": "ExpSurplus", "nu": 1.0},
    "u_max": 12.0,
}


@pytest.fixture()
def runner():
    return CliRunner()


def model_file(tmp_path, data, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def report_of(result):
    assert result.stdout, result.stderr
    return json.loads(result.stdout)


class TestRuinCommand:
    def test_classical_two_routes(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--u", "0:3:4", "--routes", "closed_form,monte_carlo",
            "--paths", "20000", "--seed", "7"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        assert rep["command"] == "ruin"
        assert rep["model"]["premium"]["family"] == "Constant"
        cf = rep["routes"]["closed_form"]["values"]
        assert cf[0] == pytest.approx(0.5, rel=1e-9)
        cell = rep["agreement"]["closed_form"]["monte_carlo"]
        assert cell["max_abs_z"] <= 3.0
        assert rep["agreement"]["monte_carlo"]["closed_form"] == cell

    def test_report_round_trips(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--u", "0:2:3", "--routes", "closed_form,asymptotic"])
        assert res.exit_code == 0, res.output
        first = json.dumps(json.loads(res.stdout), sort_keys=True)
        second = json.dumps(json.loads(first), sort_keys=True)
        assert first == second

    def test_discount_and_penalty_forced(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, LINEAR_DISCOUNTED),
            "--u", "0:2:3", "--routes", "closed_form"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        assert rep["model"]["delta"] == 0.0
        assert rep["model"]["penalty"]["family"] == "RuinIndicator"
        assert any("forced" in note for note in rep["notes"])

    def test_expdecay_closed_form_attaches_branch_warning(self, runner,
                                                          tmp_path):
        data = dict(CLASSICAL, premium={"family": "ExpDecay", "c": 1.0})
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, data),
            "--u", "0:2:3", "--routes", "closed_form"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        entry = rep["routes"]["closed_form"]
        assert entry["values"][0] == pytest.approx(1.0 / 3.0, rel=1e-8)
        assert any("branch" in w for w in entry["warnings"])

    def test_seed_gives_identical_reports(self, runner, tmp_path):
        args = ["ruin", "--model", model_file(tmp_path, CLASSICAL),
                "--u", "0:1:2", "--routes", "monte_carlo",
                "--paths", "2000", "--seed", "11"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.exit_code == b.exit_code == 0
        assert a.stdout == b.stdout

    def test_single_point_grid(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--u", "1:1:1", "--routes", "closed_form"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        assert rep["u"] == [1.0]
        want = 0.5 * np.exp(-1.0)
        assert rep["routes"]["closed_form"]["values"] == [
            pytest.approx(want, rel=1e-9)]


class TestPenaltyCommand:
    def test_greens_vs_monte_carlo(self, runner, tmp_path):
        res = runner.invoke(main, [
            "penalty", "--model", model_file(tmp_path, LINEAR_DISCOUNTED),
            "--u", "0:2:3", "--routes", "greens,monte_carlo",
            "--paths", "20000", "--seed", "5"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        cell = rep["agreement"]["greens"]["monte_carlo"]
        assert cell["max_abs_z"] <= 3.0
        diag = rep["routes"]["greens"]["diagnostics"]
        assert diag["residual"] <= 1e-5
        assert diag["boundary_residual"] <= 1e-8
        assert diag["sylvester_residual"] <= 1e-6

    def test_asymptotic_route_carries_ratio_checkpoints(self, runner,
                                                        tmp_path):
        res = runner.invoke(main, [
            "penalty", "--model", model_file(tmp_path, LINEAR_DISCOUNTED),
            "--u", "0:10:6", "--routes", "asymptotic"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)
        diag = rep["routes"]["asymptotic"]["diagnostics"]
        assert len(diag["ratio_checkpoints"]) >= 3
        assert diag["terms"]

    def test_delta_zero_flag_reduces_to_ruin(self, runner, tmp_path):
        path = model_file(tmp_path, LINEAR_DISCOUNTED)
        common = ["--model", path, "--u", "0:4:5",
                  "--routes", "closed_form,asymptotic"]
        via_penalty = runner.invoke(main, ["penalty", "--delta-zero"] + common)
        via_ruin = runner.invoke(main, ["ruin"] + common)
        assert via_penalty.exit_code == via_ruin.exit_code == 0
        rp = json.loads(via_penalty.stdout)
        rr = json.loads(via_ruin.stdout)
        assert rp["routes"] == rr["routes"]
        assert rp["agreement"] == rr["agreement"]

    def test_closed_form_refused_for_discounted_model(self, runner, tmp_path):
        res = runner.invoke(main, [
            "penalty", "--model", model_file(tmp_path, LINEAR_DISCOUNTED),
            "--u", "0:2:3", "--routes", "closed_form"])
        assert res.exit_code == 0, res.output
        entry = report_of(res)["routes"]["closed_form"]
        assert entry["values"] is None
        assert entry["refusal"] is not None
        assert entry["error"] is None


class TestExitCodes:
    def test_bad_json_exits_2_without_report(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        res = runner.invoke(main, ["ruin", "--model", str(path),
                                   "--u", "0:1:2"])
        assert res.exit_code == 2
        assert res.stdout == ""
        assert "model validation failed" in res.stderr

    def test_missing_model_file_exits_2(self, runner, tmp_path):
        res = runner.invoke(main, ["ruin", "--model",
                                   str(tmp_path / "absent.json")])
        assert res.exit_code == 2

    def test_unknown_route_exits_2(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--routes", "telepathy"])
        assert res.exit_code == 2
        assert "unknown routes" in res.stderr

    def test_grid_beyond_u_max_exits_2(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--u", "0:50:5"])
        assert res.exit_code == 2
        assert "u_max" in res.stderr

    def test_route_crash_exits_3_with_partial_report(self, runner, tmp_path):
        # Net-profit violation: the closed form escapes [0, 1] and the
        # simulation refuses on the drift check.
        data = dict(CLASSICAL, premium={"family": "Constant", "c": 0.4})
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, data),
            "--u", "0:1:2", "--routes", "closed_form,monte_carlo",
            "--paths", "500"])
        assert res.exit_code == 3
        rep = report_of(res)
        assert rep["routes"]["closed_form"]["error"] is not None
        assert rep["routes"]["monte_carlo"]["refusal"] is not None


class TestArtifacts:
    def test_csv_and_figures_written(self, runner, tmp_path):
        out = tmp_path / "artifacts"
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL),
            "--u", "0:2:3", "--routes", "closed_form,monte_carlo",
            "--paths", "2000", "--csv", str(out), "--plots"])
        assert res.exit_code == 0, res.output
        rep = report_of(res)

        cf_csv = (out / "closed_form.csv").read_text().splitlines()
        assert cf_csv[0] == "u,value"
        assert len(cf_csv) == 4
        mc_csv = (out / "monte_carlo.csv").read_text().splitlines()
        assert mc_csv[0] == "u,value,std_error"
        first = mc_csv[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == rep["routes"]["monte_carlo"]["values"][0]

        assert (out / "ruin_curves.png").stat().st_size > 0
        assert (out / "ruin_zscores.png").stat().st_size > 0
        assert str(out / "ruin_curves.png") in rep["artifacts"]

    def test_plots_require_csv_dir(self, runner, tmp_path):
        res = runner.invoke(main, [
            "ruin", "--model", model_file(tmp_path, CLASSICAL), "--plots"])
        assert res.exit_code == 2
        assert "--csv" in res.stderr


class TestSelftest:
    def test_quick_passes(self, runner):
        res = runner.invoke(main, ["selftest", "quick"])
        assert res.exit_code == 0, res.output
        assert "PASS" in res.stdout
        assert "criteria passed" in res.stdout

    def test_quick_with_injected_fault_names_sylvester(self, runner):
        res = runner.invoke(main, ["selftest", "quick",
                                   "--inject-fault", "wronskian_sign"])
        assert res.exit_code == 1
        assert "failure manifest" in res.stdout
        assert "greens.sylvester" in res.stdout
