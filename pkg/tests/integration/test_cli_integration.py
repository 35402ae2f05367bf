"""Integration tests for CLI functionality."""

import json
import math
from pathlib import Path
from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from logpot.cli import app
from logpot.config import ToolkitSettings


@pytest.fixture
def runner():
    """Create CLI test runner."""
    return CliRunner()


def reports(out: Path, command: str):
    return sorted(out.glob(f"{command}-*.json"))


class TestCLIIntegration:
    """Global options and error handling."""

    def test_help_command(self, runner):
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        for command in ("capacity", "leja", "green", "bergman", "ratio", "lambda-star", "build-map", "bw-rate", "reproduce"):
            assert command in result.stdout

    def test_version_command(self, runner):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert "logpot version" in result.stdout
        assert "unknown" not in result.stdout.lower()

    def test_invalid_global_option(self, runner, scene_file, circle_scene):
        result = runner.invoke(app, ["--resolution", "8", "capacity", "--scene", str(scene_file(circle_scene))])
        assert result.exit_code == 2
        assert "resolution" in result.stdout

    def test_empty_scene(self, runner, scene_file):
        result = runner.invoke(app, ["capacity", "--scene", str(scene_file({}))])
        assert result.exit_code == 2
        assert "set" in result.stdout

    def test_error_location(self, runner, scene_file):
        path = scene_file({"set": {"kind": "circle", "radius": -1.0}})
        result = runner.invoke(app, ["capacity", "--scene", str(path)])
        assert result.exit_code == 2
        assert "set.radius" in result.stdout

    def test_missing_scene_file(self, runner, temp_dir):
        result = runner.invoke(app, ["capacity", "--scene", str(temp_dir / "absent.json")])
        assert result.exit_code == 2

    @patch("logpot.cli.capacity_command")
    def test_capacity_arguments(self, mock_capacity, runner, scene_file, circle_scene):
        path = scene_file(circle_scene)
        result = runner.invoke(app, ["--seed", "5", "capacity", "--scene", str(path), "--k-max", "16", "--refine"])
        assert result.exit_code == 0
        args = mock_capacity.call_args[0]
        assert args[0] == path
        assert isinstance(args[1], ToolkitSettings)
        assert args[1].seed == 5
        assert args[2:] == (16, True)

    @patch("logpot.cli.green_command")
    def test_green_repeatable_points(self, mock_green, runner, scene_file, circle_scene):
        path = scene_file(circle_scene)
        result = runner.invoke(app, ["green", "--scene", str(path), "--at", "2,0", "--at", "0,3", "--pole=-3,0"])
        assert result.exit_code == 0
        assert mock_green.call_args[0][2:] == (["2,0", "0,3"], "-3,0", 11)


class TestCommands:
    """Small real runs writing reports."""

    @pytest.fixture
    def out(self, temp_dir):
        return temp_dir / "out"

    def invoke(self, runner, out, *args):
        return runner.invoke(app, ["--output-dir", str(out), *args])

    def test_capacity_writes_report(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "capacity", "--scene", str(scene_file(circle_scene)), "--k-max", "64")
        assert result.exit_code == 0, result.stdout
        [path] = reports(out, "capacity")
        data = json.loads(path.read_text())
        assert data["results"]["capacity"] == pytest.approx(1.0, rel=0.05)
        assert data["parameters"]["k_max"] == 64
        assert data["parameters"]["resolution"] == 128
        assert (out / f"{path.stem}-kth_diameters.csv").exists()

    def test_reports_are_byte_identical(self, runner, temp_dir, scene_file, circle_scene):
        path = str(scene_file(circle_scene))
        first = runner.invoke(app, ["-o", str(temp_dir / "a"), "capacity", "--scene", path, "-k", "32"])
        second = runner.invoke(app, ["-o", str(temp_dir / "b"), "capacity", "--scene", path, "-k", "32"])
        assert first.exit_code == second.exit_code == 0
        [a] = reports(temp_dir / "a", "capacity")
        [b] = reports(temp_dir / "b", "capacity")
        assert a.name == b.name
        assert a.read_bytes() == b.read_bytes()

    def test_leja_with_fekete(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "leja", "--scene", str(scene_file(circle_scene)), "-k", "5", "--fekete-pool", "16")
        assert result.exit_code == 0, result.stdout
        [path] = reports(out, "leja")
        tables = json.loads(path.read_text())["tables"]
        assert len(tables["points"]) == 5
        assert [row["k"] for row in tables["fekete"]] == [2, 3, 4, 5]

    def test_green_at_point(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "green", "--scene", str(scene_file(circle_scene)), "--at", "2,0")
        assert result.exit_code == 0, result.stdout
        [path] = reports(out, "green")
        [row] = json.loads(path.read_text())["tables"]["values"]
        assert row["green"] == pytest.approx(math.log(2.0), abs=0.02)

    def test_green_pole_on_K(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "green", "--scene", str(scene_file(circle_scene)), "--pole", "1,0")
        assert result.exit_code == 2
        assert "Error" in result.stdout

    def test_bad_point(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "green", "--scene", str(scene_file(circle_scene)), "--at", "two")
        assert result.exit_code == 2
        assert "cannot read point" in result.stdout

    def test_bergman(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "bergman", "--scene", str(scene_file(circle_scene)), "--k", "4")
        assert result.exit_code == 0, result.stdout
        [path] = reports(out, "bergman")
        results = json.loads(path.read_text())["results"]
        assert results["max_on_K"] == pytest.approx(5 / (2 * math.pi), rel=1e-6)

    def test_ratio_needs_poles(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "ratio", "--scene", str(scene_file(circle_scene)), "--kind", "subdiag")
        assert result.exit_code == 2
        assert "pole set" in result.stdout

    def test_lambda_star_passes(self, runner, out, scene_file, circle_scene):
        path = str(scene_file(circle_scene))
        result = self.invoke(runner, out, "lambda-star", "--scene", path, "--t", "1.0", "--r-schedule", "0.4,0.2")
        assert result.exit_code == 0, result.stdout
        [report] = reports(out, "lambda-star")
        assert json.loads(report.read_text())["verdicts"] == {"lambda_star": "passes"}

    def test_bad_schedule(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "lambda-star", "--scene", str(scene_file(circle_scene)), "--schedule", "a,b")
        assert result.exit_code == 2

    def test_explicit_separating_map(self, runner, out, scene_file, annulus_scene):
        path = str(scene_file(annulus_scene))
        result = self.invoke(runner, out, "build-map", "--scene", path, "--pole", "0.1,0", "--pole=-0.1,0")
        assert result.exit_code == 0, result.stdout
        [report] = reports(out, "build-map")
        data = json.loads(report.read_text())
        assert data["verdicts"] == {"separating_map": "pass"}
        assert data["results"]["map"]["max_K"] <= 4.17

    def test_failed_separation_exits_3(self, runner, out, scene_file, annulus_scene):
        result = self.invoke(runner, out, "build-map", "--scene", str(scene_file(annulus_scene)), "--pole", "2,0")
        assert result.exit_code == 3
        [report] = reports(out, "build-map")
        assert json.loads(report.read_text())["verdicts"] == {"separating_map": "fail"}

    def test_bw_rate_rejects_expression(self, runner, out, scene_file, circle_scene):
        result = self.invoke(runner, out, "bw-rate", "--scene", str(scene_file(circle_scene)), "--f", "sin(z)")
        assert result.exit_code == 2
        assert "unknown name" in result.stdout

    @pytest.mark.slow
    def test_bw_rate(self, runner, out, scene_file, circle_scene):
        path = str(scene_file(circle_scene))
        result = self.invoke(runner, out, "bw-rate", "--scene", path, "--f", "1/(z-2)", "--k-max", "20")
        assert result.exit_code == 0, result.stdout
        [report] = reports(out, "bw-rate")
        data = json.loads(report.read_text())
        assert data["results"]["classification"] == "geometric"
        assert data["results"]["predicted_r"] == pytest.approx(2.0, rel=0.05)

    def test_ratio_csv(self, runner, out, temp_dir, scene_file, circle_scene):
        table = temp_dir / "ratios.csv"
        path = str(scene_file(circle_scene))
        result = self.invoke(runner, out, "ratio", "--kind", "poly", "--scene", path, "--k-max", "30", "--csv", str(table))
        assert result.exit_code == 0, result.stdout
        lines = table.read_text().splitlines()
        assert lines[0] == "k,ratio,ratio_root,witness_m"
        assert len(lines) == 31
        k, ratio, root, _ = lines[4].split(",")
        assert int(k) == 4
        assert float(ratio) == pytest.approx(math.sqrt(5 / (2 * math.pi)), rel=1e-6)
        assert float(root) == pytest.approx(float(ratio) ** 0.25, rel=1e-9)


class TestDocumentedInvocations:
    """The command lines given in the usage documentation parse as written."""

    @pytest.fixture
    def path(self, scene_file, annulus_scene):
        return scene_file(annulus_scene, name="s.json")

    @patch("logpot.cli.capacity_command")
    def test_capacity(self, mock_capacity, runner, path):
        result = runner.invoke(app, ["capacity", "--scene", str(path), "--kmax", "200"])
        assert result.exit_code == 0, result.stdout
        assert mock_capacity.call_args[0][0] == path
        assert mock_capacity.call_args[0][2:] == (200, False)

    @patch("logpot.cli.green_command")
    def test_green(self, mock_green, runner, path):
        result = runner.invoke(app, ["green", "--scene", str(path), "--pole", "3,0", "--grid", "21"])
        assert result.exit_code == 0, result.stdout
        args = mock_green.call_args[0]
        assert not args[2]
        assert args[3:] == ("3,0", 21)

    @patch("logpot.cli.ratio_command")
    def test_ratio(self, mock_ratio, runner, path, temp_dir):
        table = temp_dir / "out.csv"
        result = runner.invoke(
            app, ["ratio", "--kind", "subdiag", "--scene", str(path), "--k-max", "40", "--csv", str(table)]
        )
        assert result.exit_code == 0, result.stdout
        args = mock_ratio.call_args[0]
        assert args[2].value == "subdiag"
        assert args[3:] == (40, 1, table)

    @patch("logpot.cli.lambda_star_command")
    def test_lambda_star(self, mock_lambda, runner, path):
        result = runner.invoke(
            app, ["lambda-star", "--scene", str(path), "--t", "1.0", "--r-schedule", "0.4,0.2,0.1,0.05"]
        )
        assert result.exit_code == 0, result.stdout
        assert mock_lambda.call_args[0][2:4] == (1.0, "0.4,0.2,0.1,0.05")

    @patch("logpot.cli.build_map_command")
    def test_build_map(self, mock_build, runner, path):
        result = runner.invoke(
            app, ["build-map", "--scene", str(path), "--rho", "0.1", "--m-max", "8", "--eps", "0.05"]
        )
        assert result.exit_code == 0, result.stdout
        args = mock_build.call_args[0]
        assert args[2:5] == (0.1, 8, 0.05)
        assert not args[5]

    @patch("logpot.cli.bw_rate_command")
    def test_bw_rate(self, mock_rate, runner, path):
        result = runner.invoke(
            app, ["bw-rate", "--scene", str(path), "--f", "1/((z-1.5)*(z-3))", "--n", "1", "--k-max", "30"]
        )
        assert result.exit_code == 0, result.stdout
        assert mock_rate.call_args[0][2:] == ("1/((z-1.5)*(z-3))", 1, 30, None)

    def test_scene_is_required(self, runner, path):
        result = runner.invoke(app, ["capacity", str(path)])
        assert result.exit_code == 2

    def test_ratio_help_names_exit_behavior(self, runner):
        result = runner.invoke(app, ["ratio", "--help"])
        assert result.exit_code == 0
        text = " ".join(result.stdout.split())
        assert "violates" in text
        assert "inconclusive" in text
