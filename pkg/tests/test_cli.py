"""Command-line interface: argument plumbing, JSON output, exit codes."""

from __future__ import annotations

import csv
import json

import pytest

from mecoff.cli import main
from mecoff.scenario import (SWEEP_COLUMNS, TRACE_COLUMNS, TRADEOFF_COLUMNS,
                             ScenarioConfig)


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured


def _last_json(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


def _write_csv(path, rows):
    path.write_text("frames,value\n"
                    + "".join(f"{a},{b}\n" for a, b in rows))


class TestParser:
    @pytest.mark.parametrize("argv", [
        ["--help"],
        ["fit-complexity", "--help"],
        ["fit-accuracy", "--help"],
        ["estimate-rho", "--help"],
        ["solve", "--help"],
        ["sweep", "--help"],
        ["convergence", "--help"],
        ["tradeoff", "--help"],
        ["breakdown", "--help"],
    ])
    def test_help_exits_cleanly(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0

    def test_missing_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_invalid_scheme_choice_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--scheme", "gradient_descent"])
        assert exc.value.code == 2

    def test_invalid_init_choice_is_usage_error(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["convergence", "--out", str(tmp_path), "--init", "warm"])
        assert exc.value.code == 2


class TestFittingCommands:
    def test_fit_complexity(self, capsys, tmp_path):
        path = tmp_path / "macs.csv"
        _write_csv(path, [(m, 2.0 * m + 3.0) for m in range(1, 9)])
        code, out = _run(capsys, ["fit-complexity", str(path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["m_c0"] == pytest.approx(2.0, rel=1e-9)
        assert record["m_c1"] == pytest.approx(3.0, rel=1e-9)
        assert record["rmse"] == pytest.approx(0.0, abs=1e-9)

    def test_fit_accuracy(self, capsys, tmp_path):
        path = tmp_path / "acc.csv"
        _write_csv(path, [(m, 0.95 - 1.2 / (m + 2.0))
                          for m in range(1, 17)])
        code, out = _run(capsys, ["fit-accuracy", str(path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["m_a0"] == pytest.approx(1.2, rel=1e-3)
        assert record["m_a1"] == pytest.approx(2.0, rel=1e-3)
        assert record["m_a2"] == pytest.approx(0.95, rel=1e-4)
        assert record["rmse"] < 1e-6

    def test_estimate_rho_column_mapping(self, capsys, tmp_path):
        # Column 0 holds MAC counts, column 1 the measured latency.
        path = tmp_path / "prof.csv"
        _write_csv(path, [(1e9, 0.05), (2e9, 0.10)])
        code, out = _run(capsys, ["estimate-rho", str(path),
                                  "--clock-hz", "2.4e9"])
        assert code == 0
        assert _last_json(out.out)["rho"] == pytest.approx(0.12, rel=1e-12)

    def test_missing_file_reports_json_error(self, capsys, tmp_path):
        code, out = _run(capsys, ["fit-complexity",
                                  str(tmp_path / "absent.csv")])
        assert code == 2
        record = _last_json(out.err)
        assert "error" in record and "message" in record
        assert out.out == ""


class TestSolve:
    def test_all_local_defaults(self, capsys):
        code, out = _run(capsys, ["solve", "--scheme", "all_local"])
        assert code == 0
        record = _last_json(out.out)
        assert record["scheme"] == "all_local"
        assert record["n_devices"] == 8
        assert record["seed"] == 0
        assert record["offload"] == [0] * 8
        assert record["offload_rate"] == 0.0
        assert len(record["frames"]) == 8
        assert record["avg_cost"] == pytest.approx(
            record["total_cost"] / 8, rel=1e-12)

    def test_config_file_with_seed_override(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        ScenarioConfig(n_devices=4, seed=1).to_json(cfg_path)
        code, out = _run(capsys, ["solve", "--scheme", "channel_aware",
                                  "--config", str(cfg_path), "--seed", "7"])
        assert code == 0
        record = _last_json(out.out)
        assert record["n_devices"] == 4
        assert record["seed"] == 7

        # the override must behave exactly like baking the seed in
        direct_path = tmp_path / "cfg7.json"
        ScenarioConfig(n_devices=4, seed=7).to_json(direct_path)
        code2, out2 = _run(capsys, ["solve", "--scheme", "channel_aware",
                                    "--config", str(direct_path)])
        assert code2 == 0
        assert _last_json(out2.out)["total_cost"] == record["total_cost"]

    def test_unknown_config_key_reports_json_error(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"n_devices": 4, "shape": "hex"}))
        code, out = _run(capsys, ["solve", "--scheme", "all_local",
                                  "--config", str(cfg_path)])
        assert code == 2
        assert "shape" in _last_json(out.err)["message"]


class TestSweep:
    def test_tiny_sweep_writes_csv(self, capsys, tmp_path):
        code, out = _run(capsys, [
            "sweep", "--vary", "n_devices", "--values", "2,3",
            "--schemes", "all_local", "--reps", "1",
            "--out", str(tmp_path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["rows"] == 2
        assert record["failed"] == 0
        with open(record["csv"], newline="") as fh:
            got = list(csv.DictReader(fh))
        assert list(got[0].keys()) == SWEEP_COLUMNS
        assert len(got) == 2
        assert [r["value"] for r in got] == ["2", "3"]

    def test_failures_counted_not_fatal(self, capsys, tmp_path):
        code, out = _run(capsys, [
            "sweep", "--vary", "n_devices", "--values", "20",
            "--schemes", "exhaustive", "--reps", "1",
            "--out", str(tmp_path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["rows"] == 1
        assert record["failed"] == 1

    def test_weights_axis_parses_triples(self, capsys, tmp_path):
        code, out = _run(capsys, [
            "sweep", "--vary", "weights", "--values", "0.2:0.2:0.6",
            "--schemes", "all_local", "--reps", "1",
            "--out", str(tmp_path)])
        assert code == 0
        assert _last_json(out.out)["rows"] == 1


class TestConvergence:
    def test_trace_and_csv(self, capsys, tmp_path):
        code, out = _run(capsys, ["convergence", "--out", str(tmp_path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["iterations"] >= 1
        assert record["converged"] is True
        assert record["final_objective"] == pytest.approx(
            -3.0700437684915203, rel=1e-9)
        with open(record["csv"], newline="") as fh:
            got = list(csv.DictReader(fh))
        assert list(got[0].keys()) == TRACE_COLUMNS
        assert len(got) == record["iterations"]

    def test_solver_knobs_accepted(self, capsys, tmp_path):
        code, out = _run(capsys, [
            "convergence", "--out", str(tmp_path), "--s", "0.7",
            "--delta", "0", "--max-iters", "4", "--init", "zero"])
        assert code == 0
        record = _last_json(out.out)
        assert record["iterations"] == 4
        assert record["converged"] is False


class TestTradeoffAndBreakdown:
    def test_tradeoff_surface(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        ScenarioConfig(n_devices=4).to_json(cfg_path)
        code, out = _run(capsys, [
            "tradeoff", "--weights-grid", "3", "--out", str(tmp_path),
            "--config", str(cfg_path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["rows"] == 1
        with open(record["csv"], newline="") as fh:
            got = list(csv.DictReader(fh))
        assert list(got[0].keys()) == TRADEOFF_COLUMNS

    def test_breakdown_with_and_without_csv(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        ScenarioConfig(n_devices=4).to_json(cfg_path)
        code, out = _run(capsys, [
            "breakdown", "--scheme", "all_edge", "--config", str(cfg_path),
            "--out", str(tmp_path)])
        assert code == 0
        record = _last_json(out.out)
        assert record["rows"] == 1
        assert (tmp_path / "breakdown.csv").exists()

        code2, out2 = _run(capsys, [
            "breakdown", "--scheme", "all_edge", "--config", str(cfg_path)])
        assert code2 == 0
        assert _last_json(out2.out)["csv"] == "None"
