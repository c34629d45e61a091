from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from plotkit import KINDS, TRACE_COLUMNS
from plotkit.cli import main

GOLDEN_FILES = {
    "cost_vs_axis": "sweep.csv",
    "runtime": "sweep.csv",
    "convergence": "admm_trace.csv",
    "metric_panels": "breakdown.csv",
    "tradeoff_surface": "tradeoff.csv",
}


def run_cli(argv):
    return main(argv)


class TestArguments:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli(["--help"])
        assert excinfo.value.code == 0
        assert "--kind" in capsys.readouterr().out

    def test_missing_required_arguments(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli([])
        assert excinfo.value.code == 2

    def test_unknown_kind_is_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli(["--kind", "histogram", "--in", "x.csv", "--out", "x.svg"])
        assert excinfo.value.code == 2


class TestRendering:
    @pytest.mark.parametrize("kind", KINDS)
    def test_each_kind_renders(self, kind, golden_dir, tmp_path, capsys):
        out = tmp_path / f"{kind}.svg"
        rc = run_cli(
            [
                "--kind",
                kind,
                "--in",
                str(golden_dir / GOLDEN_FILES[kind]),
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert out.stat().st_size > 0
        record = json.loads(capsys.readouterr().out)
        assert record["kind"] == kind
        assert record["out"] == str(out)

    def test_repeat_runs_are_byte_identical(self, golden_dir, tmp_path, capsys):
        outs = []
        for name in ("a.svg", "b.svg"):
            out = tmp_path / name
            rc = run_cli(
                [
                    "--kind",
                    "convergence",
                    "--in",
                    str(golden_dir / "admm_trace.csv"),
                    "--out",
                    str(out),
                ]
            )
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestFailures:
    def test_schema_violation_names_column(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        header = ",".join(c for c in TRACE_COLUMNS if c != "objective")
        bad.write_text(header + "\n1,0.1,0.1,0.5,True\n")
        rc = run_cli(
            ["--kind", "convergence", "--in", str(bad), "--out", str(tmp_path / "o.svg")]
        )
        assert rc == 2
        record = json.loads(capsys.readouterr().err)
        assert record["error"] == "SchemaError"
        assert "objective" in record["message"]
        assert not (tmp_path / "o.svg").exists()

    def test_empty_csv_fails_cleanly(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        rc = run_cli(
            ["--kind", "runtime", "--in", str(empty), "--out", str(tmp_path / "o.svg")]
        )
        assert rc == 2
        record = json.loads(capsys.readouterr().err)
        assert record["error"] == "EmptyInputError"

    def test_header_only_csv_fails_cleanly(self, tmp_path, capsys):
        header_only = tmp_path / "header.csv"
        header_only.write_text(",".join(TRACE_COLUMNS) + "\n")
        rc = run_cli(
            [
                "--kind",
                "convergence",
                "--in",
                str(header_only),
                "--out",
                str(tmp_path / "o.svg"),
            ]
        )
        assert rc == 2
        assert json.loads(capsys.readouterr().err)["error"] == "EmptyInputError"

    def test_missing_input_file(self, tmp_path, capsys):
        rc = run_cli(
            [
                "--kind",
                "convergence",
                "--in",
                str(tmp_path / "absent.csv"),
                "--out",
                str(tmp_path / "o.svg"),
            ]
        )
        assert rc == 2
        assert json.loads(capsys.readouterr().err)["error"] == "PlotkitError"


class TestInstalledScript:
    @pytest.mark.skipif(shutil.which("plot") is None, reason="script not installed")
    def test_console_script_renders(self, golden_dir, tmp_path):
        out = tmp_path / "cli.svg"
        result = subprocess.run(
            [
                "plot",
                "--kind",
                "convergence",
                "--in",
                str(golden_dir / "admm_trace.csv"),
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert out.stat().st_size > 0
